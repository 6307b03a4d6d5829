//! First-passage laws entering the convolution route for the excursion
//! maximum: the hitting time of a level by reflected Brownian motion and by
//! a free Brownian motion.

use std::f64::consts::PI;

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::series::{clamp_probability, sum_series, TailKind};
use crate::Error;

/// `P(T_U(a) > t)` for the hitting time of level `a` by reflected Brownian
/// motion, through the eigenfunction expansion
/// `(4/π) Σ_{k≥0} (-1)^k/(2k+1) exp(-(2k+1)² π² t / (8a²))`.
///
/// The expansion slows down as `t/a² → 0`; once the term budget is exhausted
/// an accuracy error carrying the partial value is returned.
pub fn tu_survival(a: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("tu_survival requires a > 0, got {a}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("tu_survival requires t > 0, got {t}")));
    }
    let beta = PI * PI * t / (8.0 * a * a);
    let inner = crate::series::scaled_policy(policy, 4.0 / PI);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let m = (2 * k - 1) as f64; // odd index 2k+1 with k starting at 0
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * (-m * m * beta).exp() / m
    });
    let res = crate::series::affine_result(raw, 4.0 / PI, 0.0)?;
    clamp_probability(res, policy).and_then(|r| crate::series::enforce_budget(r, policy))
}

/// First-passage density of standard Brownian motion at level `a`:
/// `a / sqrt(2π t³) e^{-a²/2t}`.
pub fn tbhat_density(a: f64, t: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "tbhat_density requires a > 0, got {a}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "tbhat_density requires t > 0, got {t}"
        )));
    }
    Ok(a / (2.0 * PI * t * t * t).sqrt() * (-a * a / (2.0 * t)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tu_survival_reference_value_and_limits() {
        let policy = SeriesPolicy::default();
        // frozen from an independent high-precision evaluation
        assert_abs_diff_eq!(
            tu_survival(1.0, 1.0, &policy).unwrap().value,
            0.37077742979952390,
            epsilon = 1e-13
        );
        // t -> 0+: hitting a level takes positive time
        assert_abs_diff_eq!(
            tu_survival(1.0, 1e-4, &policy).unwrap().value,
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn tu_survival_scaling_invariance() {
        let policy = SeriesPolicy::default();
        let a = tu_survival(2.0, 1.0, &policy).unwrap().value;
        let b = tu_survival(1.0, 0.25, &policy).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }

    #[test]
    fn tu_survival_slow_regime_reports_partial_value() {
        let tight = SeriesPolicy {
            abs_tol: 1e-10,
            max_terms: 16,
            quadrature_points: 16,
        };
        match tu_survival(1.0, 1e-6, &tight) {
            Err(Error::Accuracy {
                value, est_error, ..
            }) => {
                assert!(value > 0.5 && value < 1.5);
                assert!(est_error > 0.0);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn tbhat_density_normalizes_and_peaks_at_third() {
        let gl = crate::quad::GaussLegendre::cached(128);
        // split at the mode; the tail beyond 400 is below 1e-10
        let mass = gl.integrate(1e-12, 2.0, |t| tbhat_density(1.0, t).unwrap())
            + gl.integrate(2.0, 400.0, |t| tbhat_density(1.0, t).unwrap());
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);

        // golden-section search for the maximizer; expected a^2/3
        let (mut lo, mut hi) = (0.05, 2.0);
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        while hi - lo > 1e-9 {
            let x1 = hi - inv_phi * (hi - lo);
            let x2 = lo + inv_phi * (hi - lo);
            if tbhat_density(1.0, x1).unwrap() < tbhat_density(1.0, x2).unwrap() {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        assert_abs_diff_eq!(0.5 * (lo + hi), 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn tbhat_density_scaling() {
        let a = tbhat_density(3.0, 2.0).unwrap();
        let b = tbhat_density(1.0, 2.0 / 9.0).unwrap() / 9.0;
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
}
