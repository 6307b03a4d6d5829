//! Marginal law of `U*(t)`, the height of the highest complete excursion
//! before time `t`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::quad::{adaptive_simpson, GaussLegendre};
use crate::series::{clamp_probability, kolmogorov_survival, sum_series, TailKind};
use crate::series::{tbhat_density, tu_survival};
use crate::Error;

/// The three algebraically independent evaluation routes for
/// `P(U*(t) > x)`. They must agree; the self-check suite triangulates them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalRoute {
    /// Termwise integral of the density series:
    /// `2 Σ_{k≥1} (-1)^{k-1} erfc(√2 k x / √t)`.
    Termwise,
    /// Scale mixture of the Kolmogorov law over the arcsine last zero.
    Mixture,
    /// Convolution of the two hitting times `T_U(x)` and `T_B̂(x)`.
    Convolution,
}

/// Density `f_{U*(t)}(x) = 4 sqrt(2/(πt)) Σ_{k≥1} (-1)^{k-1} k e^{-2k²x²/t}`.
pub fn ustar_density(x: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    check_t(t)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "ustar_density requires x > 0, got {x}"
        )));
    }
    let c = 2.0 * x * x / t;
    let norm = 4.0 * (2.0 / (PI * t)).sqrt();
    let inner = super::scaled_policy(policy, norm);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * (-kf * kf * c).exp()
    });
    let mut res = super::affine_result(raw, norm, 0.0)?;
    res.value = res.value.max(0.0);
    super::enforce_budget(res, policy)
}

/// `P(U*(t) > x)` through the requested route.
pub fn ustar_survival(
    x: f64,
    t: f64,
    policy: &SeriesPolicy,
    route: SurvivalRoute,
) -> Result<EvalResult> {
    policy.validate()?;
    check_t(t)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!(
            "ustar_survival requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(EvalResult::exact(1.0));
    }
    let res = match route {
        SurvivalRoute::Termwise => survival_termwise(x, t, policy)?,
        SurvivalRoute::Mixture => survival_mixture(x, t, policy)?,
        SurvivalRoute::Convolution => survival_convolution(x, t, policy)?,
    };
    clamp_probability(res, policy).and_then(|r| super::enforce_budget(r, policy))
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("requires t > 0, got {t}")));
    }
    Ok(())
}

fn survival_termwise(x: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    let c = std::f64::consts::SQRT_2 * x / t.sqrt();
    let inner = super::scaled_policy(policy, 2.0);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * libm::erfc(k as f64 * c)
    });
    super::affine_result(raw, 2.0, 0.0)
}

fn survival_mixture(x: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    // integrate the Kolmogorov survival against the arcsine weight with the
    // substitution y = sin^2(phi), which removes both endpoint singularities
    let gl = GaussLegendre::cached(policy.quadrature_points);
    let inner_policy = SeriesPolicy {
        abs_tol: (policy.abs_tol * 1e-2).max(1e-15),
        ..*policy
    };
    let mut inner_err = 0.0f64;
    let mut terms = 0usize;
    let value = gl.integrate(0.0, PI / 2.0, |phi| {
        let arg = x / (t.sqrt() * phi.sin());
        let r = kolmogorov_survival(arg, &inner_policy).unwrap_or_else(|e| match e {
            Error::Accuracy {
                value, est_error, ..
            } => {
                inner_err = inner_err.max(est_error);
                EvalResult {
                    value,
                    est_error,
                    terms_used: 0,
                }
            }
            _ => EvalResult::exact(0.0),
        });
        inner_err = inner_err.max(r.est_error);
        terms += r.terms_used;
        r.value
    }) * 2.0
        / PI;
    Ok(EvalResult {
        value,
        est_error: policy.abs_tol.min(1e-12) + inner_err,
        terms_used: terms,
    })
}

fn survival_convolution(x: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    // P(T_U(x) + T_Bhat(x) < t) = ∫ f_{T_Bhat(x)}(s) P(T_U(x) < t-s) ds.
    // Both endpoint factors vanish exponentially; the integration window is
    // trimmed where the analytic bounds certify mass below the tolerance.
    let tol = (policy.abs_tol * 0.1).max(1e-14);
    let log_cut = (2.0 / tol).ln();
    let s_lo = (x * x / (2.0 * log_cut)).min(0.45 * t);
    let s_hi = t - (x * x / (2.0 * log_cut)).min(0.45 * t);
    let inner_policy = SeriesPolicy {
        abs_tol: (policy.abs_tol * 1e-2).max(1e-15),
        max_terms: policy.max_terms,
        quadrature_points: policy.quadrature_points,
    };
    let mut inner_err = 0.0f64;
    let mut terms = 0usize;
    let mut integrand = |s: f64| {
        let density = tbhat_density(x, s).unwrap_or(0.0);
        if density == 0.0 {
            return 0.0;
        }
        let surv = match tu_survival(x, t - s, &inner_policy) {
            Ok(r) => {
                terms += r.terms_used;
                inner_err = inner_err.max(r.est_error);
                r.value
            }
            Err(Error::Accuracy {
                value, est_error, ..
            }) => {
                inner_err = inner_err.max(est_error);
                value.clamp(0.0, 1.0)
            }
            Err(_) => 1.0,
        };
        density * (1.0 - surv)
    };
    let (value, quad_err) = adaptive_simpson(&mut integrand, s_lo, s_hi, tol);
    Ok(EvalResult {
        value,
        est_error: quad_err + 2.0 * tol + inner_err,
        terms_used: terms,
    })
}
