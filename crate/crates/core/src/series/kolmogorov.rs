//! Survival function of the supremum of the absolute Brownian bridge (the
//! Kolmogorov-Smirnov null law).

use crate::error::Result;
use crate::policy::{EvalResult, SeriesPolicy};
use crate::series::{clamp_probability, sum_series, TailKind};
use crate::Error;

/// `P(b* > x) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2 k² x²}`.
pub fn kolmogorov_survival(x: f64, policy: &SeriesPolicy) -> Result<EvalResult> {
    policy.validate()?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!(
            "kolmogorov_survival requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(EvalResult::exact(1.0));
    }
    let c = 2.0 * x * x;
    let inner = crate::series::scaled_policy(policy, 2.0);
    let raw = sum_series(&inner, TailKind::Alternating, |k| {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * (-kf * kf * c).exp()
    });
    let res = crate::series::affine_result(raw, 2.0, 0.0)?;
    clamp_probability(res, policy).and_then(|r| crate::series::enforce_budget(r, policy))
}
