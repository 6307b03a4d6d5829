//! The expectation kernels `H(a, b)` and `Ĥ(a, b, c)` of the hitting time
//! `ξ`, in closed series form.
//!
//! `H(a,b)  = E[ 1{b - aξ > 0} (b - aξ)^{-1/2} ]`
//! `Ĥ(a,b,c) = E[ 1{aξ - b > 0} (aξ - b)^{-3/2} exp(-c/(aξ - b)) ]`

use std::f64::consts::PI;

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::quad::GaussLegendre;
use crate::series::{sum_series, xi_density, TailKind};
use crate::Error;

/// `H(a,b) = (a/b^{3/2}) Σ_{k∈Z} |1+2k| exp(-(1+2k)² a/(2b))`, folded onto
/// the odd integers; identically 0 for `b <= 0`.
pub fn h_kernel(a: f64, b: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("h_kernel requires a > 0, got {a}")));
    }
    if b.is_nan() {
        return Err(Error::domain("h_kernel: b is NaN".to_string()));
    }
    if b <= 0.0 {
        return Ok(EvalResult::exact(0.0));
    }
    let half_ratio = 0.5 * a / b;
    let norm = 2.0 * a / (b * b.sqrt());
    let inner = super::scaled_policy(policy, norm);
    let raw = sum_series(&inner, TailKind::Positive, |k| {
        let m = (2 * k - 1) as f64;
        m * (-m * m * half_ratio).exp()
    });
    let mut res = super::affine_result(raw, norm, 0.0)?;
    res.value = res.value.max(0.0);
    super::enforce_budget(res, policy)
}

/// `Ĥ(a,b,c)` via the closed alternating series for `b >= 0`:
/// `(π^{5/2}/(2a√c)) Σ_{k∈Z} (-1)^{k+1} k² exp(-k²π²b/(2a) - |k|π√(2c/a))`.
///
/// For `b < 0` the series diverges; the expectation is still well defined and
/// is evaluated by direct quadrature against the density of `ξ`.
pub fn hhat_kernel(a: f64, b: f64, c: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("hhat_kernel requires a > 0, got {a}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("hhat_kernel requires c > 0, got {c}")));
    }
    if b.is_nan() {
        return Err(Error::domain("hhat_kernel: b is NaN".to_string()));
    }
    if b < 0.0 {
        return hhat_by_quadrature(a, b, c, policy);
    }
    let theta_quad = PI * PI * b / (2.0 * a);
    let theta_lin = PI * (2.0 * c / a).sqrt();
    let norm = PI.powf(2.5) / (a * c.sqrt());
    let inner = super::scaled_policy(policy, norm);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * kf * (-kf * kf * theta_quad - kf * theta_lin).exp()
    });
    let mut res = super::affine_result(raw, norm, 0.0)?;
    res.value = res.value.max(0.0);
    super::enforce_budget(res, policy)
}

fn hhat_by_quadrature(a: f64, b: f64, c: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    // substitute s = c/(au - b), then s = z^2:
    // Ĥ = (2/(a√c)) ∫_0^∞ p_ξ((b + c/z²)/a) e^{-z²} dz
    let gl = GaussLegendre::cached(policy.quadrature_points.max(64));
    let inner = SeriesPolicy {
        abs_tol: 1e-14,
        ..*policy
    };
    let mut terms = 0usize;
    let mut eval = |z: f64| {
        let u = (b + c / (z * z)) / a;
        if u <= 0.0 {
            return 0.0;
        }
        match xi_density(u, &inner) {
            Ok(r) => {
                terms += r.terms_used;
                r.value * (-z * z).exp()
            }
            Err(_) => 0.0,
        }
    };
    // e^{-z^2} < 1e-16 beyond z = 6.1; split to resolve the inner peak
    let value = gl.integrate(0.0, 1.0, &mut eval) + gl.integrate(1.0, 6.5, &mut eval);
    Ok(EvalResult {
        value: 2.0 / (a * c.sqrt()) * value,
        est_error: policy.abs_tol.min(1e-10),
        terms_used: terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h_reference_and_zero_half_line() {
        let policy = SeriesPolicy::default();
        assert_eq!(h_kernel(1.0, -1.0, &policy).unwrap().value, 0.0);
        assert_eq!(h_kernel(1.0, 0.0, &policy).unwrap().value, 0.0);
        assert_abs_diff_eq!(
            h_kernel(1.0, 1.0, &policy).unwrap().value,
            1.2797525655070044,
            epsilon = 1e-13
        );
    }

    #[test]
    fn h_scaling_identity() {
        // H(a,b) = b^{-1/2} H(a/b, 1)
        let policy = SeriesPolicy::default();
        let lhs = h_kernel(2.0, 4.0, &policy).unwrap().value;
        let rhs = h_kernel(0.5, 1.0, &policy).unwrap().value / 2.0;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn hhat_reference_value() {
        let policy = SeriesPolicy::default();
        assert_abs_diff_eq!(
            hhat_kernel(1.0, 0.5, 0.5, &policy).unwrap().value,
            0.090654393127249291,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            hhat_kernel(2.0, 1.0, 0.25, &policy).unwrap().value,
            0.30823894871596339,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hhat_nonincreasing_in_c() {
        let policy = SeriesPolicy::default();
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let c = 0.1 * i as f64;
            let v = hhat_kernel(1.0, 0.5, c, &policy).unwrap().value;
            assert!(v <= prev + 1e-12, "increased at c={c}");
            prev = v;
        }
    }

    #[test]
    fn hhat_negative_b_continuous_across_zero() {
        let policy = SeriesPolicy::default();
        let above = hhat_kernel(1.0, 1e-6, 0.5, &policy).unwrap().value;
        let below = hhat_kernel(1.0, -1e-6, 0.5, &policy).unwrap().value;
        assert!((above - below).abs() < 1e-5, "{above} vs {below}");
        assert!(below > 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let policy = SeriesPolicy::default();
        assert!(h_kernel(0.0, 1.0, &policy).is_err());
        assert!(hhat_kernel(1.0, 0.5, 0.0, &policy).is_err());
        assert!(hhat_kernel(-1.0, 0.5, 1.0, &policy).is_err());
    }
}
