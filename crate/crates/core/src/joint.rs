//! Weighted Monte-Carlo estimators for the joint law of `(U*(t), θ*(t))`:
//! expectations, rectangle probabilities and pointwise joint-density values.
//!
//! Estimators partition the sample index space into fixed-size chunks, give
//! every chunk its own derived stream, and merge the per-chunk moments in
//! chunk order. The partition depends only on the sample count, so results
//! are bit-identical for every thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::policy::SeriesPolicy;
use crate::rng::{streams, RngStream};
use crate::samplers::{
    sample_joint_weighted, sample_lambda, sample_xi, LambdaTruncation, WeightedSample,
};
use crate::series::xi_density;

/// Fixed chunk width of the deterministic sample partition.
pub const CHUNK: usize = 1 << 14;

/// A Monte-Carlo point estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Sample standard deviation of the summand divided by sqrt(n_samples).
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            n: self.n + other.n,
            sum: self.sum + other.sum,
            sumsq: self.sumsq + other.sumsq,
        }
    }

    fn estimate(&self, seed: u64) -> MonteCarloEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            n_samples: self.n,
            seed,
        }
    }
}

/// Runs `body` over `n` sample indices split into deterministic chunks, each
/// with its own substream, and merges the chunk moments in chunk order.
fn chunked_moments<F>(n: usize, rng: &RngStream, body: F) -> Result<Moments>
where
    F: Fn(&mut RngStream, &mut Moments, usize) -> Result<()> + Sync,
{
    let chunks: Vec<(usize, usize)> = (0..n.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(n - c * CHUNK)))
        .collect();
    let partials: Vec<Result<Moments>> = chunks
        .par_iter()
        .map(|&(c, len)| {
            let mut chunk_rng = rng.substream(streams::CHUNK_BASE + c as u64);
            let mut m = Moments::default();
            body(&mut chunk_rng, &mut m, len)?;
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in partials {
        total = total.merge(p?);
    }
    Ok(total)
}

/// `E[f(U*(t), θ*(t))]` for a bounded Borel `f`, through the weighted
/// representation: the summand of sample `i` is `f(uᵢ, θᵢ) wᵢ`.
pub fn estimate_expectation<F>(
    f: F,
    t: f64,
    n: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<MonteCarloEstimate>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("estimate_expectation: t > 0, got {t}")));
    }
    if n < 2 {
        return Err(Error::domain("estimate_expectation needs n >= 2"));
    }
    let moments = chunked_moments(n, rng, |chunk_rng, m, len| {
        for _ in 0..len {
            let s: WeightedSample = sample_joint_weighted(t, chunk_rng, trunc, policy)?;
            m.push(f(s.u, s.theta) * s.weight);
        }
        Ok(())
    })?;
    Ok(moments.estimate(rng.seed()))
}

/// `P(U*(t) <= a, θ*(t) <= b)` by the weighted representation.
pub fn rect_prob(
    a: f64,
    b: f64,
    t: f64,
    n: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<MonteCarloEstimate> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("rect_prob requires a > 0, got {a}")));
    }
    if !(b > 0.0 && b <= t) {
        return Err(Error::domain(format!(
            "rect_prob requires 0 < b <= t, got b={b}, t={t}"
        )));
    }
    estimate_expectation(
        |u, theta| {
            if u <= a && theta <= b {
                1.0
            } else {
                0.0
            }
        },
        t,
        n,
        rng,
        trunc,
        policy,
    )
}

/// A reusable pool of the latent draws `(u ~ ξ, v = 1/e, λ(v))` entering the
/// Monte-Carlo evaluation of the joint density. The pool's law does not
/// depend on the evaluation point, so one pool can serve a whole grid with
/// common random numbers.
pub struct JointDensityPool {
    draws: Vec<(f64, f64, f64)>,
    seed: u64,
}

impl JointDensityPool {
    pub fn generate(
        n: usize,
        rng: &RngStream,
        trunc: &LambdaTruncation,
        policy: &SeriesPolicy,
    ) -> Result<JointDensityPool> {
        if n < 2 {
            return Err(Error::domain("joint density pool needs n >= 2"));
        }
        let chunks: Vec<(usize, usize)> = (0..n.div_ceil(CHUNK))
            .map(|c| (c, CHUNK.min(n - c * CHUNK)))
            .collect();
        let parts: Vec<Result<Vec<(f64, f64, f64)>>> = chunks
            .par_iter()
            .map(|&(c, len)| {
                let mut chunk_rng = rng.substream(streams::CHUNK_BASE + c as u64);
                let mut out = Vec::with_capacity(len);
                for _ in 0..len {
                    let u = sample_xi(&mut chunk_rng, policy)?;
                    let v = 1.0 / chunk_rng.exponential();
                    let lambda = sample_lambda(v, &mut chunk_rng, trunc, policy)?;
                    out.push((u, v, lambda));
                }
                Ok(out)
            })
            .collect();
        let mut draws = Vec::with_capacity(n);
        for p in parts {
            draws.extend(p?);
        }
        Ok(JointDensityPool {
            draws,
            seed: rng.seed(),
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Joint density estimate at `(x, y)` for horizon `t` from this pool.
    pub fn density_at(
        &self,
        x: f64,
        y: f64,
        t: f64,
        policy: &SeriesPolicy,
    ) -> Result<MonteCarloEstimate> {
        let scale = density_prefactor(x, y, t, policy)?;
        let mut m = Moments::default();
        if scale == 0.0 {
            return Ok(MonteCarloEstimate {
                mean: 0.0,
                std_error: 0.0,
                n_samples: self.draws.len(),
                seed: self.seed,
            });
        }
        for &(u, v, lambda) in &self.draws {
            m.push(rho_summand(x, y, t, u, v, lambda));
        }
        let mut est = m.estimate(self.seed);
        est.mean *= scale;
        est.std_error *= scale;
        Ok(est)
    }
}

/// Prefactor `sqrt(2/π) p_ξ(y/x²) / x⁴` of the joint density, or exactly 0
/// outside the support `{x > 0, 0 < y < t}`.
fn density_prefactor(x: f64, y: f64, t: f64, policy: &SeriesPolicy) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("joint density requires x > 0, got {x}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("joint density requires t > 0, got {t}")));
    }
    if y <= 0.0 || y >= t {
        return Ok(0.0);
    }
    let (pxi, _) = crate::policy::value_lenient(xi_density(y / (x * x), policy))?;
    Ok((2.0 / std::f64::consts::PI).sqrt() * pxi / (x * x * x * x))
}

/// The integrand of the excursion-measure average: for one latent draw
/// `(u, v, λ(v))` and `ρ₁ = t - y - x²u`,
/// `(1/λ) [ sqrt((ρ₁)₊) - sqrt((ρ₁ - x²λ/v²)₊) ]`.
#[inline]
fn rho_summand(x: f64, y: f64, t: f64, u: f64, v: f64, lambda: f64) -> f64 {
    let rho1 = t - y - x * x * u;
    let s1 = rho1.max(0.0).sqrt();
    let s2 = (rho1 - x * x * lambda / (v * v)).max(0.0).sqrt();
    (s1 - s2) / lambda
}

/// Monte-Carlo estimate of the joint density of `(U*(t), θ*(t))` at `(x, y)`
/// from `n` fresh latent draws.
pub fn joint_density(
    x: f64,
    y: f64,
    t: f64,
    n: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<MonteCarloEstimate> {
    let scale = density_prefactor(x, y, t, policy)?;
    if scale == 0.0 {
        return Ok(MonteCarloEstimate {
            mean: 0.0,
            std_error: 0.0,
            n_samples: n,
            seed: rng.seed(),
        });
    }
    if n < 2 {
        return Err(Error::domain("joint_density needs n >= 2"));
    }
    let moments = chunked_moments(n, rng, |chunk_rng, m, len| {
        for _ in 0..len {
            let u = sample_xi(chunk_rng, policy)?;
            let v = 1.0 / chunk_rng.exponential();
            let lambda = sample_lambda(v, chunk_rng, trunc, policy)?;
            m.push(rho_summand(x, y, t, u, v, lambda));
        }
        Ok(())
    })?;
    let mut est = moments.estimate(rng.seed());
    est.mean *= scale;
    est.std_error *= scale;
    Ok(est)
}

/// Maps a point of the `(U*(t), θ*(t))` plane to the unit-horizon plane.
pub fn scale_to_unit(x: f64, y: f64, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("scale_to_unit requires t > 0, got {t}")));
    }
    Ok((x / t.sqrt(), y / t))
}

/// Jacobian `t^{3/2}` of the unit-horizon rescaling:
/// `p_{(U*(t),θ*(t))}(x, y) = t^{-3/2} p_{(U*(1),θ*(1))}(x/√t, y/t)`.
pub fn density_jacobian(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "density_jacobian requires t > 0, got {t}"
        )));
    }
    Ok(t * t.sqrt())
}
