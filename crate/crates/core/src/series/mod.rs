//! Closed-form laws of the excursion functionals, evaluated by controlled
//! series summation.
//!
//! Every function here is a pure function of its arguments and can be called
//! concurrently from any number of threads.
//!
//! The summation engine enforces a uniform truncation contract: terms are
//! accumulated with compensated (Kahan) summation and the sum stops once the
//! terms have entered their eventually-decreasing regime *and* fall below the
//! policy tolerance. The reported `est_error` combines the truncation bound
//! with a rounding floor proportional to the total summed magnitude, which
//! keeps the error report honest for strongly cancelling alternating series.

mod arcsine;
mod hitting;
mod kernels;
mod kolmogorov;
mod laplace;
mod thetastar;
mod ustar;
mod xi;

pub use arcsine::{arcsine_cdf, arcsine_density};
pub use hitting::{tbhat_density, tu_survival};
pub use kernels::{h_kernel, hhat_kernel};
pub use kolmogorov::kolmogorov_survival;
pub use laplace::{lambda_laplace, xi_laplace};
pub use thetastar::thetastar_density;
pub use ustar::{ustar_density, ustar_survival, SurvivalRoute};
pub use xi::{xi_cdf, xi_cdf_pdf, xi_density, xi_density_other_representation, XI_CROSSOVER};

use crate::error::{Error, Result};
use crate::policy::{EvalResult, SeriesPolicy};

/// How the tail of a summed series is bounded once terms decrease.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TailKind {
    /// Alternating signs with (eventually) monotone magnitudes: the tail is
    /// bounded by the first omitted term.
    Alternating,
    /// Positive terms with at least geometric decay of ratio <= 1/2 in the
    /// stopping regime: the tail is bounded by twice the first omitted term.
    Positive,
}

/// Sums `term(k)` for `k = 1, 2, ...` under the policy truncation contract.
///
/// `term` returns the signed k-th term. Stopping requires the magnitudes to
/// have started decreasing, so series whose terms first grow (theta-like
/// kernels near the slow end of their domain) are handled correctly.
pub(crate) fn sum_series(
    policy: &SeriesPolicy,
    tail: TailKind,
    mut term: impl FnMut(usize) -> f64,
) -> Result<EvalResult> {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    let mut abs_mass = 0.0f64;
    let mut prev_mag = f64::INFINITY;
    let mut k = 0usize;
    loop {
        k += 1;
        let t = term(k);
        let mag = t.abs();
        add_compensated(&mut sum, &mut comp, t);
        abs_mass += mag;
        // the positive-tail bound 2|t_k| needs at least ratio-1/2 decay
        let decreasing = match tail {
            TailKind::Alternating => mag <= prev_mag,
            TailKind::Positive => mag <= 0.5 * prev_mag,
        };
        let truncation = match tail {
            TailKind::Alternating => mag,
            TailKind::Positive => 2.0 * mag,
        };
        let floor = rounding_floor(abs_mass);
        // stop once the projected error clears the budget, or once further
        // terms can only shuffle rounding noise
        let converged = truncation + floor < policy.abs_tol;
        let noise_bound = floor >= policy.abs_tol && truncation < 0.25 * floor;
        if decreasing && (converged || noise_bound) && k >= 2 {
            let est_error = truncation + floor;
            let value = sum + comp;
            if est_error > policy.abs_tol {
                return Err(Error::Accuracy {
                    value,
                    est_error,
                    terms_used: k,
                });
            }
            return Ok(EvalResult {
                value,
                est_error,
                terms_used: k,
            });
        }
        if k >= policy.max_terms {
            return Err(Error::Accuracy {
                value: sum + comp,
                est_error: truncation + floor,
                terms_used: k,
            });
        }
        prev_mag = mag;
    }
}

#[inline]
fn add_compensated(sum: &mut f64, comp: &mut f64, t: f64) {
    let y = t - *comp;
    let s = *sum + y;
    *comp = (s - *sum) - y;
    *sum = s;
}

#[inline]
fn rounding_floor(abs_mass: f64) -> f64 {
    4.0 * f64::EPSILON * abs_mass
}

/// Policy whose tolerance is tightened by the prefactor that will multiply
/// the summed series, so the scaled error report still clears the caller's
/// budget.
pub(crate) fn scaled_policy(policy: &SeriesPolicy, scale: f64) -> SeriesPolicy {
    SeriesPolicy {
        abs_tol: policy.abs_tol / scale.abs().max(1.0),
        ..*policy
    }
}

/// Applies `value -> value * scale + offset` to an evaluation, keeping the
/// partial value inside an accuracy error usable by scaling it the same way.
pub(crate) fn affine_result(res: Result<EvalResult>, scale: f64, offset: f64) -> Result<EvalResult> {
    match res {
        Ok(mut r) => {
            r.value = r.value * scale + offset;
            r.est_error *= scale.abs();
            Ok(r)
        }
        Err(Error::Accuracy {
            value,
            est_error,
            terms_used,
        }) => Err(Error::Accuracy {
            value: value * scale + offset,
            est_error: est_error * scale.abs(),
            terms_used,
        }),
        e => e,
    }
}

/// Clamps a probability-valued evaluation into `[0, 1]`, rejecting values
/// that overshoot by more than the policy tolerance plus the reported error.
pub(crate) fn clamp_probability(mut res: EvalResult, policy: &SeriesPolicy) -> Result<EvalResult> {
    let slack = policy.abs_tol + res.est_error;
    if res.value < -slack || res.value > 1.0 + slack {
        return Err(Error::Internal(format!(
            "probability value {} outside [0,1] beyond tolerance",
            res.value
        )));
    }
    res.value = res.value.clamp(0.0, 1.0);
    Ok(res)
}

/// Demotes a formally successful evaluation whose scaled error report exceeds
/// the policy tolerance into an accuracy error, so `est_error <= abs_tol`
/// holds on every `Ok`.
pub(crate) fn enforce_budget(res: EvalResult, policy: &SeriesPolicy) -> Result<EvalResult> {
    if res.est_error > policy.abs_tol {
        Err(Error::Accuracy {
            value: res.value,
            est_error: res.est_error,
            terms_used: res.terms_used,
        })
    } else {
        Ok(res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_sum_log_two() {
        // sum (-1)^{k+1}/k converges too slowly for the budget: Accuracy error
        let policy = SeriesPolicy {
            abs_tol: 1e-12,
            max_terms: 1000,
            quadrature_points: 16,
        };
        let res = sum_series(&policy, TailKind::Alternating, |k| {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            s / k as f64
        });
        match res {
            Err(Error::Accuracy {
                value, terms_used, ..
            }) => {
                assert_eq!(terms_used, 1000);
                assert!((value - std::f64::consts::LN_2).abs() < 1e-3);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn geometric_tail_meets_tolerance() {
        let policy = SeriesPolicy::default();
        let res = sum_series(&policy, TailKind::Positive, |k| 0.25f64.powi(k as i32)).unwrap();
        assert!((res.value - 1.0 / 3.0).abs() < 1e-10);
        assert!(res.est_error <= policy.abs_tol);
    }

    #[test]
    fn growing_then_decaying_terms_are_not_cut_early() {
        // terms rise until k = 40 then decay fast; naive early stopping would
        // truncate at k = 1 if the tolerance is loose
        let policy = SeriesPolicy {
            abs_tol: 1e-8,
            max_terms: 10_000,
            quadrature_points: 16,
        };
        let res = sum_series(&policy, TailKind::Positive, |k| {
            let z = k as f64 / 40.0;
            z * (-z * z).exp() * 1e-9
        })
        .unwrap();
        assert!(res.terms_used > 100);
    }
}
