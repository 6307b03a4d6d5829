//! Density of `θ*(t)`, the time taken by the highest complete excursion to
//! reach its maximum.

use std::f64::consts::PI;

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::series::{sum_series, TailKind};
use crate::Error;

/// `f_{θ*(t)}(x) = (1/x) Σ_{k≥1} (-1)^{k+1} sinh(πk q)/cosh²(πk q)` with
/// `q = sqrt(x/(t-x))`, supported on `(0, t)`.
///
/// Near `x = 0` the terms first grow, peak around `πk q ≈ 0.88` and only then
/// decay like `e^{-πkq}`; the summation engine keeps going through the hump
/// and the compensated sum keeps the heavy cancellation honest. When the
/// rounding floor exceeds the requested tolerance an accuracy error carrying
/// the partial value is returned rather than a silently degraded number.
pub fn thetastar_density(x: f64, t: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "thetastar_density requires t > 0, got {t}"
        )));
    }
    if x.is_nan() {
        return Err(Error::domain("thetastar_density: x is NaN".to_string()));
    }
    if x <= 0.0 || x >= t {
        return Ok(EvalResult::exact(0.0));
    }
    let q = (x / (t - x)).sqrt();
    let step = PI * q;
    let inner = super::scaled_policy(policy, 1.0 / x);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        // sinh(z)/cosh^2(z) = 2 w (1 - w^2) / (1 + w^2)^2 with w = e^{-z}
        let w = (-(k as f64) * step).exp();
        let d = 1.0 + w * w;
        sign * 2.0 * w * (1.0 - w * w) / (d * d)
    });
    let mut res = super::affine_result(raw, 1.0 / x, 0.0)?;
    if res.value < 0.0 {
        if res.value < -res.est_error - policy.abs_tol {
            return Err(Error::Internal(format!(
                "thetastar_density produced {} at x={x}, t={t}",
                res.value
            )));
        }
        res.value = 0.0;
    }
    super::enforce_budget(res, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_value_inside_support() {
        let policy = SeriesPolicy::default();
        assert_abs_diff_eq!(
            thetastar_density(0.3, 1.0, &policy).unwrap().value,
            0.71525313055647546,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_outside_support() {
        let policy = SeriesPolicy::default();
        assert_eq!(thetastar_density(-0.1, 1.0, &policy).unwrap().value, 0.0);
        assert_eq!(thetastar_density(1.5, 1.0, &policy).unwrap().value, 0.0);
        assert_eq!(thetastar_density(1.0, 1.0, &policy).unwrap().value, 0.0);
    }

    #[test]
    fn vanishes_at_the_right_edge() {
        let policy = SeriesPolicy::default();
        // each term is ~ 2 e^{-πk sqrt(x/(t-x))} for x near t
        let v = thetastar_density(0.999, 1.0, &policy).unwrap().value;
        assert!(v >= 0.0 && v < 1e-30);
    }

    #[test]
    fn scaling_in_t() {
        let policy = SeriesPolicy::default();
        let a = thetastar_density(0.3, 2.0, &policy).unwrap().value;
        let b = thetastar_density(0.15, 1.0, &policy).unwrap().value / 2.0;
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }

    #[test]
    fn near_zero_matches_leading_asymptotics() {
        // f ~ π / (4 sqrt(x (t - x))) as x -> 0+, relative error O(x)
        let policy = SeriesPolicy::default();
        let x = 1e-6;
        let v = thetastar_density(x, 1.0, &policy).unwrap().value;
        let asym = PI / (4.0 * (x * (1.0 - x)).sqrt());
        assert!((v - asym).abs() / asym < 1e-4, "{v} vs {asym}");
    }

    #[test]
    fn extreme_cancellation_reports_accuracy_error() {
        let tight = SeriesPolicy {
            abs_tol: 1e-12,
            max_terms: 500_000,
            quadrature_points: 16,
        };
        match thetastar_density(1e-9, 1.0, &tight) {
            Err(Error::Accuracy { value, .. }) => assert!(value > 0.0),
            Ok(res) => assert!(res.est_error <= tight.abs_tol),
            other => panic!("unexpected {other:?}"),
        }
    }
}
