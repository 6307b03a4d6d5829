//! Seedable samplers for every random ingredient of the weighted excursion
//! representation: the Bessel-3 hitting time `ξ`, the size-biased arcsine
//! variables `α₁` and `g(1)`, the conditional inverse-local-time series
//! `λ(x)`, and the weighted joint draw itself.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::policy::SeriesPolicy;
use crate::rng::{streams, RngStream};
use crate::series::xi_cdf_pdf;

/// Residual target of the inverse-distribution solve for `ξ`.
const XI_RESIDUAL_TOL: f64 = 1e-10;

/// One draw from the weighted representation of `(U*(t), θ*(t))`.
///
/// `E[f(U*(t), θ*(t))] = E[f(u, theta) * weight]` for bounded Borel `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    /// Excursion-height coordinate, in units of sqrt(time).
    pub u: f64,
    /// Time-to-peak coordinate, strictly inside `(0, t)`.
    pub theta: f64,
    /// Positive importance weight.
    pub weight: f64,
}

/// Truncation contract for the random series `λ(x)`: the expected mass of
/// the dropped pair tail must stay below `tail_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTruncation {
    pub tail_tol: f64,
    pub max_pairs: usize,
}

impl LambdaTruncation {
    pub fn new(tail_tol: f64, max_pairs: usize) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return Err(Error::domain("tail_tol must be > 0"));
        }
        if max_pairs == 0 {
            return Err(Error::domain("max_pairs must be positive"));
        }
        Ok(LambdaTruncation {
            tail_tol,
            max_pairs,
        })
    }
}

impl Default for LambdaTruncation {
    fn default() -> Self {
        LambdaTruncation {
            tail_tol: 1e-3,
            max_pairs: 8192,
        }
    }
}

// ---------------------------------------------------------------------------
// xi: inverse-distribution sampling
// ---------------------------------------------------------------------------

/// Draws the Bessel-3 hitting time `ξ` by inverting its distribution
/// function: a tabulated quantile start, then bracketed bisection refined
/// with Newton steps until `|F_ξ(u) - V| <= 1e-10`.
pub fn sample_xi(rng: &mut RngStream, policy: &SeriesPolicy) -> Result<f64> {
    let v = rng.open01();
    invert_xi_cdf(v, policy.abs_tol.min(XI_RESIDUAL_TOL))
}

/// Solves `F_ξ(u) = v` for `u`.
pub fn invert_xi_cdf(v: f64, tol: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::domain(format!(
            "quantile level must lie in (0,1), got {v}"
        )));
    }
    let table = xi_table();
    let mut u = table.initial_guess(v);
    // establish a bracket around the guess
    let mut lo = (u * 0.5).max(1e-8);
    let mut hi = u * 2.0;
    let mut f_lo = cdf(lo);
    let mut f_hi = cdf(hi);
    let mut guard = 0;
    while f_lo > v {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = cdf(lo);
        guard += 1;
        if guard > 1100 {
            return Err(Error::Internal(format!("xi bracket failed low at v={v}")));
        }
    }
    while f_hi < v {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = cdf(hi);
        guard += 1;
        if guard > 1100 {
            return Err(Error::Internal(format!("xi bracket failed high at v={v}")));
        }
    }
    let _ = f_lo;
    u = u.clamp(lo, hi);
    for _ in 0..200 {
        let (f, p) = xi_cdf_pdf(u, 1e-16);
        let r = f - v;
        if r.abs() <= tol {
            return Ok(u);
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = r / p;
        let next = u - step;
        u = if p > 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Internal(format!(
        "xi quantile iteration did not converge at v={v}"
    )))
}

#[inline]
fn cdf(u: f64) -> f64 {
    xi_cdf_pdf(u, 1e-16).0
}

struct XiTable {
    u: Vec<f64>,
    dudv: Vec<f64>,
}

const XI_TAB_LO: f64 = 1.0 / 64.0;
const XI_TAB_HI: f64 = 63.0 / 64.0;
const XI_TAB_CELLS: usize = 1984;

impl XiTable {
    fn build() -> XiTable {
        let step = (XI_TAB_HI - XI_TAB_LO) / XI_TAB_CELLS as f64;
        let mut u = Vec::with_capacity(XI_TAB_CELLS + 1);
        let mut dudv = Vec::with_capacity(XI_TAB_CELLS + 1);
        for j in 0..=XI_TAB_CELLS {
            let v = XI_TAB_LO + step * j as f64;
            // plain bisection is enough at build time
            let (mut lo, mut hi) = (1e-4, 60.0);
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < v {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let node = 0.5 * (lo + hi);
            let (_, p) = xi_cdf_pdf(node, 1e-16);
            u.push(node);
            dudv.push(1.0 / p);
        }
        XiTable { u, dudv }
    }

    fn initial_guess(&self, v: f64) -> f64 {
        if v < XI_TAB_LO {
            // invert the leading reflection term 4/sqrt(pi) sqrt(y) e^{-y},
            // y = 1/(2u)
            let c = (4.0 / std::f64::consts::PI.sqrt()).ln();
            let mut y = (-v.ln()).max(1.5);
            for _ in 0..4 {
                y = c + 0.5 * y.ln() - v.ln();
            }
            return 0.5 / y;
        }
        if v > XI_TAB_HI {
            // invert the leading spectral term 1 - 2 e^{-pi^2 u / 2}
            let u = -(2.0 / (std::f64::consts::PI.powi(2))) * ((1.0 - v) / 2.0).ln();
            return u.max(0.65);
        }
        let step = (XI_TAB_HI - XI_TAB_LO) / XI_TAB_CELLS as f64;
        let pos = (v - XI_TAB_LO) / step;
        let j = (pos as usize).min(XI_TAB_CELLS - 1);
        let s = pos - j as f64;
        // cubic Hermite in the cell, derivatives from 1/pdf
        let (u0, u1) = (self.u[j], self.u[j + 1]);
        let (m0, m1) = (self.dudv[j] * step, self.dudv[j + 1] * step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * u0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * u1
            + (s3 - s2) * m1
    }
}

fn xi_table() -> &'static XiTable {
    static TABLE: OnceLock<XiTable> = OnceLock::new();
    TABLE.get_or_init(XiTable::build)
}

// ---------------------------------------------------------------------------
// arcsine-type transforms
// ---------------------------------------------------------------------------

/// Draws `α₁` with density `(2/π)(1-s²)^{-1/2}` on `[0,1]`, as
/// `sin(π V / 2)` for `V` uniform.
pub fn sample_alpha1(rng: &mut RngStream) -> f64 {
    (std::f64::consts::FRAC_PI_2 * rng.open01()).sin()
}

/// Draws the last zero `g(1)` from the arcsine law, as `sin²(π V / 2)`.
pub fn sample_arcsine_g1(rng: &mut RngStream) -> f64 {
    let s = (std::f64::consts::FRAC_PI_2 * rng.open01()).sin();
    s * s
}

// ---------------------------------------------------------------------------
// lambda: the conditional inverse-local-time series
// ---------------------------------------------------------------------------

/// Number of pair terms needed so that the expected dropped tail
/// `(2/3) Σ_{k>K} E[(1/x + Γ_k)^{-2}] = (2/3) E[(1/x + Γ_K)^{-1}]`
/// falls below `tail_tol`.
pub fn lambda_pairs_needed(x: f64, tail_tol: f64) -> usize {
    debug_assert!(x > 0.0 && tail_tol > 0.0);
    let bound = 1.5 * tail_tol;
    if x < bound {
        return 0;
    }
    let c = 1.0 / x;
    // I_K(c) = ∫_0^∞ e^{-ct} (1+t)^{-K} dt = E[(1/x + Γ_K)^{-1}] / 1,
    // computed by the stable branch for the given c
    if c >= 30.0 {
        let mut k = 1usize;
        loop {
            if i_k_asymptotic(k as f64, c) < bound {
                return k;
            }
            k += 1;
            if k > 1_000_000 {
                return k;
            }
        }
    }
    let mut i_k = exp_e1_scaled(c); // I_1
    let mut k = 1usize;
    while i_k >= bound {
        i_k = (1.0 - c * i_k) / k as f64;
        k += 1;
        if k > 1_000_000 {
            break;
        }
    }
    k
}

/// Laplace-expansion evaluation of `I_K(c)`, accurate for `c >= 30`.
fn i_k_asymptotic(k: f64, c: f64) -> f64 {
    let lam = c + k;
    1.0 / lam + k / (lam * lam * lam) - 2.0 * k / lam.powi(4) + 3.0 * k * k / lam.powi(5)
}

/// `e^c E_1(c)`: power series below 1, modified Lentz continued fraction
/// above.
fn exp_e1_scaled(c: f64) -> f64 {
    debug_assert!(c > 0.0);
    if c <= 1.0 {
        const EULER_GAMMA: f64 = 0.577215664901532860606512;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=30 {
            term *= -c / k as f64;
            sum -= term / k as f64;
        }
        (sum - EULER_GAMMA - c.ln()) * c.exp()
    } else {
        // E_1(c) e^c = 1/(c + 1 - 1/(c + 3 - 4/(c + 5 - 9/(...))))
        let mut b = c + 1.0;
        let tiny = 1e-300;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut cc = 1.0 / tiny;
        for i in 1..200 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b).max(tiny);
            cc = b + a / cc;
            if cc.abs() < tiny {
                cc = tiny;
            }
            let del = cc * d;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        h
    }
}

/// Exact expected value of the pair tail dropped after `Γ_K = gamma`,
/// `(2/3)/(1/x + Γ_K)`. Adding it back makes the truncated draw an unbiased
/// representative of `λ(x)` at every truncation depth.
#[inline]
fn tail_completion(inv_x: f64, gamma: f64) -> f64 {
    (2.0 / 3.0) / (inv_x + gamma)
}

/// Draws `λ(x) = x²(ξ₁+ξ₂) + Σ_{k≥1} (ξ_{2k+1}+ξ_{2k+2})/(1/x + Γ_k)²`,
/// truncated after `K` pairs chosen by [`lambda_pairs_needed`] and completed
/// with the exact conditional mean of the dropped tail.
pub fn sample_lambda(
    x: f64,
    rng: &mut RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("sample_lambda requires x > 0, got {x}")));
    }
    let pairs = lambda_pairs_needed(x, trunc.tail_tol);
    if pairs > trunc.max_pairs {
        return Err(Error::Config(format!(
            "lambda truncation needs {pairs} pairs at x={x}, max_pairs={}",
            trunc.max_pairs
        )));
    }
    sample_lambda_with_pairs(x, rng, pairs, policy)
}

/// The same draw with an explicit pair count (used by the truncation
/// invariance checks).
pub fn sample_lambda_with_pairs(
    x: f64,
    rng: &mut RngStream,
    pairs: usize,
    policy: &SeriesPolicy,
) -> Result<f64> {
    let inv_x = 1.0 / x;
    let mut sum = x * x * (sample_xi(rng, policy)? + sample_xi(rng, policy)?);
    let mut gamma = 0.0;
    for _ in 0..pairs {
        gamma += rng.exponential();
        let d = inv_x + gamma;
        sum += (sample_xi(rng, policy)? + sample_xi(rng, policy)?) / (d * d);
    }
    Ok(sum + tail_completion(inv_x, gamma))
}

// ---------------------------------------------------------------------------
// the weighted joint draw
// ---------------------------------------------------------------------------

/// Draws one weighted sample of the excursion pair at horizon `t`:
/// independent `ξ, ξ'`, a unit exponential `e₀'`, `α₁`, a uniform `α₂` and
/// `λ(1/e₀')`, combined as
///
/// `u = α₁ √t / √Z`, `θ = t α₁² ξ / Z`, `w = sqrt(π/2) α₂ e₀'² / √Z`
///
/// with `Z = ξ + ξ' + e₀'² α₂² λ(1/e₀')`. Each named variable draws from its
/// own registry substream, derived per call from the parent stream position.
pub fn sample_joint_weighted(
    t: f64,
    rng: &mut RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<WeightedSample> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "sample_joint_weighted requires t > 0, got {t}"
        )));
    }
    let salt = rng.next_u64();
    let mut xi_rng = rng.substream(salt ^ streams::XI);
    let mut xip_rng = rng.substream(salt ^ streams::XI_PRIME);
    let mut e0_rng = rng.substream(salt ^ streams::E0_PRIME);
    let mut a1_rng = rng.substream(salt ^ streams::ALPHA1);
    let mut a2_rng = rng.substream(salt ^ streams::ALPHA2);
    let mut lam_rng = rng.substream(salt ^ streams::LAMBDA);

    let xi = sample_xi(&mut xi_rng, policy)?;
    let xi_prime = sample_xi(&mut xip_rng, policy)?;
    let e0 = e0_rng.exponential();
    let alpha1 = sample_alpha1(&mut a1_rng);
    let alpha2 = a2_rng.open01();
    let lambda = sample_lambda(1.0 / e0, &mut lam_rng, trunc, policy)?;

    let z = xi + xi_prime + e0 * e0 * alpha2 * alpha2 * lambda;
    let sqrt_z = z.sqrt();
    Ok(WeightedSample {
        u: alpha1 * t.sqrt() / sqrt_z,
        theta: t * alpha1 * alpha1 * xi / z,
        weight: (std::f64::consts::PI / 2.0).sqrt() * alpha2 * e0 * e0 / sqrt_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn policy() -> SeriesPolicy {
        SeriesPolicy::default()
    }

    #[test]
    fn xi_quantiles_invert_the_cdf() {
        for &v in &[1e-12, 1e-4, 0.01, 0.2, 0.5, 0.9, 0.99, 1.0 - 1e-9] {
            let u = invert_xi_cdf(v, 1e-10).unwrap();
            assert!(u > 0.0);
            assert!((cdf(u) - v).abs() <= 1e-10, "residual too large at v={v}");
        }
        assert!(invert_xi_cdf(0.0, 1e-10).is_err());
        assert!(invert_xi_cdf(1.0, 1e-10).is_err());
    }

    #[test]
    fn xi_draws_are_deterministic_per_stream() {
        let p = policy();
        let mut a = RngStream::new(9, 77);
        let mut b = RngStream::new(9, 77);
        for _ in 0..32 {
            assert_eq!(
                sample_xi(&mut a, &p).unwrap(),
                sample_xi(&mut b, &p).unwrap()
            );
        }
    }

    #[test]
    fn xi_sample_mean_is_one_third() {
        let p = policy();
        let mut rng = RngStream::new(1234, 1);
        let n = 100_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = sample_xi(&mut rng, &p).unwrap();
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (mean - 1.0 / 3.0).abs() < 3.0 * se,
            "mean {mean}, se {se}"
        );
    }

    #[test]
    fn alpha1_stays_interior_with_mean_two_over_pi() {
        let mut rng = RngStream::new(7, 3);
        let n = 100_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let s = sample_alpha1(&mut rng);
            assert!(s > 0.0 && s < 1.0);
            sum += s;
            sumsq += s * s;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        let target = 2.0 / std::f64::consts::PI;
        assert!((mean - target).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn arcsine_median_is_half() {
        let mut rng = RngStream::new(11, 5);
        let n = 100_000usize;
        let mut below = 0usize;
        for _ in 0..n {
            if sample_arcsine_g1(&mut rng) < 0.5 {
                below += 1;
            }
        }
        let frac = below as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "median fraction {frac}");
    }

    #[test]
    fn pair_rule_matches_tail_bound_limits() {
        // x below 1.5 tau: the whole pair series may be dropped
        assert_eq!(lambda_pairs_needed(1e-4, 1e-3), 0);
        // the count is nondecreasing in x and bounded by the uniform cap
        let tau = 1e-3;
        let mut prev = 0;
        for &x in &[0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 1e4] {
            let k = lambda_pairs_needed(x, tau);
            assert!(k >= prev, "pair count decreased at x={x}");
            prev = k;
        }
        let cap = (2.0 / 3.0) / tau + 2.0;
        assert!((prev as f64) < cap + 2.0);
    }

    #[test]
    fn exp_e1_scaled_reference_values() {
        // e^c E1(c) at c = 0.5, 1, 5, 25 (high-precision references)
        assert_abs_diff_eq!(exp_e1_scaled(0.5), 0.9229106324837305, epsilon = 1e-12);
        assert_abs_diff_eq!(exp_e1_scaled(1.0), 0.5963473623231941, epsilon = 1e-12);
        assert_abs_diff_eq!(exp_e1_scaled(5.0), 0.1704221762847322, epsilon = 1e-12);
        assert_abs_diff_eq!(exp_e1_scaled(25.0), 0.03851469884490402, epsilon = 1e-12);
    }

    #[test]
    fn lambda_mean_matches_lemma_value() {
        let p = policy();
        let trunc = LambdaTruncation::default();
        for &x in &[0.5f64, 1.0] {
            let mut rng = RngStream::new(2024, 8);
            let n = 40_000usize;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let l = sample_lambda(x, &mut rng, &trunc, &p).unwrap();
                sum += l;
                sumsq += l * l;
            }
            let mean = sum / n as f64;
            let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
            let target = 2.0 / 3.0 * (x + x * x);
            assert!(
                (mean - target).abs() < 3.5 * se,
                "x={x}: mean {mean} target {target} se {se}"
            );
        }
    }

    #[test]
    fn lambda_mean_vanishes_with_x() {
        let p = policy();
        let trunc = LambdaTruncation::default();
        let mut rng = RngStream::new(5150, 2);
        let n = 20_000usize;
        let x = 0.01;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let l = sample_lambda(x, &mut rng, &trunc, &p).unwrap();
            sum += l;
            sumsq += l * l;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        let target = 2.0 / 3.0 * (x + x * x);
        assert!((mean - target).abs() < 3.5 * se + 1e-4);
    }

    #[test]
    fn lambda_rejects_exhausted_budget() {
        let p = policy();
        let trunc = LambdaTruncation::new(1e-4, 16).unwrap();
        let mut rng = RngStream::new(1, 1);
        match sample_lambda(5.0, &mut rng, &trunc, &p) {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn doubling_pairs_barely_moves_the_mean() {
        let p = policy();
        let x = 1.0;
        let tau = 1e-2;
        let k = lambda_pairs_needed(x, tau);
        let n = 20_000usize;
        let run = |pairs: usize| {
            let mut rng = RngStream::new(31337, 4);
            let mut sum = 0.0;
            for _ in 0..n {
                sum += sample_lambda_with_pairs(x, &mut rng, pairs, &p).unwrap();
            }
            sum / n as f64
        };
        let m1 = run(k);
        let m2 = run(2 * k);
        assert!(
            (m1 - m2).abs() < 3.0 * tau,
            "means {m1} vs {m2} differ beyond 3 tail_tol"
        );
    }

    #[test]
    fn joint_draw_respects_support_and_mass() {
        let p = policy();
        let trunc = LambdaTruncation {
            tail_tol: 1e-2,
            max_pairs: 8192,
        };
        let t = 1.0;
        let mut rng = RngStream::new(99, 12);
        let n = 30_000usize;
        let mut wsum = 0.0;
        let mut wsq = 0.0;
        for _ in 0..n {
            let s = sample_joint_weighted(t, &mut rng, &trunc, &p).unwrap();
            assert!(s.u > 0.0);
            assert!(s.theta > 0.0 && s.theta < t);
            assert!(s.weight > 0.0);
            wsum += s.weight;
            wsq += s.weight * s.weight;
        }
        let mean = wsum / n as f64;
        let se = ((wsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "E[w] = {mean} ± {se}");
    }
}
