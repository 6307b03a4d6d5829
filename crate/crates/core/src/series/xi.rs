//! Law of the hitting time `ξ` of level 1 by a 3-dimensional Bessel process
//! started at 0.
//!
//! Two series representations are available for both the density and the
//! distribution function: a reflection-type sum that converges fastest for
//! small arguments and a spectral sum that converges fastest for large
//! arguments. They are analytically equal; the crossover is a pure
//! performance choice.

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::series::{sum_series, TailKind};
use crate::Error;

/// Argument at which evaluation switches from the small-`u` reflection series
/// to the large-`u` spectral series. Either representation is correct on the
/// whole half-line; 0.6 balances the term counts of the two sides.
pub const XI_CROSSOVER: f64 = 0.6;

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Density `p_ξ(u)` of the Bessel-3 hitting time of level 1.
pub fn xi_density(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("xi_density requires u > 0, got {u}")));
    }
    let res = if u <= XI_CROSSOVER {
        density_small(u, policy)?
    } else {
        density_large(u, policy)?
    };
    super::enforce_budget(res, policy)
}

/// Distribution function `F_ξ(u)`, clamped into `[0, 1]`.
pub fn xi_cdf(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if u.is_nan() || u < 0.0 {
        return Err(Error::domain(format!("xi_cdf requires u >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(EvalResult::exact(0.0));
    }
    let res = if u <= XI_CROSSOVER {
        cdf_small(u, policy)?
    } else {
        cdf_large(u, policy)?
    };
    super::clamp_probability(res, policy).and_then(|r| super::enforce_budget(r, policy))
}

/// Fused distribution function and density at `u`, sharing one exponential
/// sweep. This is the workhorse of the inverse-distribution sampler, where
/// every Newton step needs both values.
pub fn xi_cdf_pdf(u: f64, abs_tol: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u <= XI_CROSSOVER {
        let inv2u = 0.5 / u;
        let mut cdf = 0.0;
        let mut pdf = 0.0;
        let mut m = 1.0f64;
        loop {
            let e = (-m * m * inv2u).exp();
            cdf += e;
            pdf += (m * m / u - 1.0) * e;
            if e * (1.0 + m * m / u) < abs_tol && m >= 3.0 {
                break;
            }
            m += 2.0;
            if m > 1e4 {
                break;
            }
        }
        let norm = (2.0 / (std::f64::consts::PI * u)).sqrt();
        (
            (2.0 * norm * cdf).min(1.0),
            2.0 / ((2.0 * std::f64::consts::PI).sqrt() * u * u.sqrt()) * pdf,
        )
    } else {
        let mut cdf = 1.0;
        let mut pdf = 0.0;
        let mut k = 1.0f64;
        let mut sign = -1.0f64;
        loop {
            let e = (-k * k * PI2 * u * 0.5).exp();
            cdf += 2.0 * sign * e;
            pdf -= sign * k * k * e;
            if (2.0 + k * k) * e < abs_tol && k >= 2.0 {
                break;
            }
            sign = -sign;
            k += 1.0;
        }
        (cdf.clamp(0.0, 1.0), PI2 * pdf)
    }
}

fn density_small(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    // all terms are positive for u < 1: m^2/u - 1 > 0
    let inv2u = 0.5 / u;
    let norm = 2.0 / ((2.0 * std::f64::consts::PI).sqrt() * u * u.sqrt());
    let inner = super::scaled_policy(policy, norm);
    let raw = sum_series(&inner, TailKind::Positive, |k| {
        let m = (2 * k - 1) as f64;
        (m * m / u - 1.0) * (-m * m * inv2u).exp()
    });
    let mut res = super::affine_result(raw, norm, 0.0)?;
    res.value = res.value.max(0.0);
    Ok(res)
}

fn density_large(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    let inner = super::scaled_policy(policy, PI2);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * kf * (-kf * kf * PI2 * u * 0.5).exp()
    });
    let mut res = super::affine_result(raw, PI2, 0.0)?;
    res.value = res.value.max(0.0);
    Ok(res)
}

fn cdf_small(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    let inv2u = 0.5 / u;
    let norm = 2.0 * (2.0 / (std::f64::consts::PI * u)).sqrt();
    let inner = super::scaled_policy(policy, norm);
    let raw = sum_series(&inner, TailKind::Positive, |k| {
        let m = (2 * k - 1) as f64;
        (-m * m * inv2u).exp()
    });
    super::affine_result(raw, norm, 0.0)
}

fn cdf_large(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    let inner = super::scaled_policy(policy, 2.0);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let kf = k as f64;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        2.0 * sign * (-kf * kf * PI2 * u * 0.5).exp()
    });
    super::affine_result(raw, 1.0, 1.0)
}

/// Density evaluated through the representation *not* chosen by the
/// crossover. Exposed for dual-representation consistency tests.
#[doc(hidden)]
pub fn xi_density_other_representation(u: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    if u <= XI_CROSSOVER {
        density_large(u, policy)
    } else {
        density_small(u, policy)
    }
}
