//! Goodness-of-fit machinery for the Donsker-scale convergence of the
//! normalized Lindley excursion pair to the continuous excursion laws.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::joint::CHUNK;
use crate::lindley::{batch_simulate, NormalizedPair, StepDistribution};
use crate::policy::{value_lenient, SeriesPolicy};
use crate::rng::{streams, RngStream};
use crate::samplers::{sample_joint_weighted, LambdaTruncation};
use crate::series::{
    kolmogorov_survival, thetastar_density, ustar_survival, SurvivalRoute,
};
use crate::quad::GaussLegendre;

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Ecdf> {
        if samples.is_empty() {
            return Err(Error::domain("empirical_cdf requires a nonempty sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("empirical_cdf rejects NaN samples"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Ecdf { sorted })
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// One-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
///
/// The statistic is the supremum of both one-sided gaps at the jump points;
/// the p-value is the Kolmogorov survival function at `sqrt(N) D`. The
/// reference distribution function is probed on a grid across the sample
/// range and must be nondecreasing into `[0, 1]`.
pub fn ks_one_sample(
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    policy: &SeriesPolicy,
) -> Result<(f64, f64)> {
    let ecdf = Ecdf::new(samples)?;
    let sorted = ecdf.sorted();
    probe_monotone(&cdf, sorted[0], sorted[sorted.len() - 1])?;
    let d = ks_statistic_sorted(sorted, &cdf);
    let n = sorted.len() as f64;
    let p = kolmogorov_survival(n.sqrt() * d, policy)?.value;
    Ok((d, p))
}

fn ks_statistic_sorted(sorted: &[f64], cdf: &impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

fn probe_monotone(cdf: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    let span = (hi - lo).max(1e-12);
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=64 {
        let x = lo + span * i as f64 / 64.0;
        let f = cdf(x);
        if !(0.0..=1.0 + 1e-9).contains(&f) || f + 1e-12 < prev {
            return Err(Error::domain(format!(
                "reference cdf is not monotone into [0,1] near x={x}"
            )));
        }
        prev = f;
    }
    Ok(())
}

/// Self-normalized weighted Kolmogorov-Smirnov distance between a weighted
/// sample and a reference distribution function.
pub fn weighted_ks_distance(
    samples: &[(f64, f64)],
    cdf: impl Fn(f64) -> f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("weighted KS requires a nonempty sample"));
    }
    let mut pairs = samples.to_vec();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(Error::domain("weighted KS requires positive total weight"));
    }
    let mut cum = 0.0;
    let mut d = 0.0f64;
    for &(x, w) in &pairs {
        let f = cdf(x);
        d = d.max((cum / total - f).abs());
        cum += w;
        d = d.max((cum / total - f).abs());
    }
    Ok(d)
}

/// Reference distribution function of `θ*(t)`, built once per policy by
/// cumulative quadrature of the density on a graded 2048-interval grid
/// (quadratic grading toward the inverse-square-root end at 0).
pub struct ThetaCdf {
    t: f64,
    phi_step: f64,
    cum: Vec<f64>,
    total: f64,
    policy: SeriesPolicy,
}

pub const THETA_CDF_INTERVALS: usize = 2048;

impl ThetaCdf {
    pub fn new(t: f64, policy: &SeriesPolicy) -> Result<ThetaCdf> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("ThetaCdf requires t > 0, got {t}")));
        }
        policy.validate()?;
        let n = THETA_CDF_INTERVALS;
        let phi_step = std::f64::consts::FRAC_PI_2 / n as f64;
        let gl = GaussLegendre::cached(8);
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for j in 0..n {
            let a = phi_step * j as f64;
            let b = phi_step * (j + 1) as f64;
            acc += gl.integrate(a, b, |phi| Self::integrand(t, phi, policy));
            cum.push(acc);
        }
        // the density integrates to 1; renormalize away the quadrature
        // residue so the tabulated function is an exact distribution function
        let total = acc;
        if !(total > 0.9999 && total < 1.0001) {
            return Err(Error::Internal(format!(
                "theta density mass {total} out of tolerance"
            )));
        }
        for c in cum.iter_mut() {
            *c /= total;
        }
        Ok(ThetaCdf {
            t,
            phi_step,
            cum,
            total,
            policy: *policy,
        })
    }

    fn integrand(t: f64, phi: f64, policy: &SeriesPolicy) -> f64 {
        // x = t sin^2(phi), dx = 2 t sin(phi) cos(phi) dphi
        let s = phi.sin();
        let x = t * s * s;
        if x <= 0.0 || x >= t {
            return 0.0;
        }
        let (f, _) = value_lenient(thetastar_density(x, t, policy)).unwrap_or((0.0, 0.0));
        f * 2.0 * t * s * phi.cos()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() || x <= 0.0 {
            return 0.0;
        }
        if x >= self.t {
            return 1.0;
        }
        let phi = (x / self.t).sqrt().min(1.0).asin();
        let j = ((phi / self.phi_step) as usize).min(THETA_CDF_INTERVALS - 1);
        let a = self.phi_step * j as f64;
        let gl = GaussLegendre::cached(8);
        let partial = gl.integrate(a, phi, |p| Self::integrand(self.t, p, &self.policy));
        (self.cum[j] + partial / self.total).clamp(0.0, 1.0)
    }
}

/// Goodness-of-fit summary for one path length.
#[derive(Debug, Clone, PartialEq)]
pub struct GoFReport {
    pub n: usize,
    pub reps: usize,
    pub ks_ustar: f64,
    pub p_ustar: f64,
    pub ks_theta: f64,
    pub p_theta: f64,
    pub degenerate_fraction: f64,
    /// `(a, b, empirical, analytic, stderr)` per reference rectangle, with
    /// `stderr` combining the empirical and the Monte-Carlo reference error.
    pub rect_errors: Vec<(f64, f64, f64, f64, f64)>,
}

impl GoFReport {
    pub fn csv_header() -> &'static str {
        "kind,n,reps,ks_ustar,p_ustar,ks_theta,p_theta,degenerate_fraction,a,b,empirical,analytic,stderr"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = vec![format!(
            "gof,{},{},{},{},{},{},{},,,,,",
            self.n,
            self.reps,
            self.ks_ustar,
            self.p_ustar,
            self.ks_theta,
            self.p_theta,
            self.degenerate_fraction
        )];
        for &(a, b, emp, ana, se) in &self.rect_errors {
            rows.push(format!(
                "rect,{},{},,,,,,{},{},{},{},{}",
                self.n, self.reps, a, b, emp, ana, se
            ));
        }
        rows
    }
}

/// The five fixed rectangles checked by every convergence report, spread
/// over the bulk of the limiting law.
pub const REFERENCE_RECTANGLES: [(f64, f64); 5] = [
    (0.4, 0.25),
    (0.7, 0.40),
    (1.0, 0.50),
    (1.3, 0.70),
    (0.8, 0.90),
];

/// Default sample count of the weighted Monte-Carlo rectangle references.
pub const DEFAULT_MC_REFERENCE_N: usize = 1_000_000;

/// Runs the full convergence diagnostic: for each path length in `n_grid`,
/// simulates `reps` walks, tests both normalized coordinates against their
/// limit laws and compares the reference rectangles against the weighted
/// Monte-Carlo estimates at the default reference size.
pub fn convergence_report(
    dist: StepDistribution,
    n_grid: &[usize],
    reps: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<Vec<GoFReport>> {
    convergence_report_with(
        dist,
        n_grid,
        reps,
        DEFAULT_MC_REFERENCE_N,
        rng,
        trunc,
        policy,
    )
}

/// [`convergence_report`] with an explicit Monte-Carlo reference size.
pub fn convergence_report_with(
    dist: StepDistribution,
    n_grid: &[usize],
    reps: usize,
    mc_reference_n: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<Vec<GoFReport>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("n_grid must be strictly increasing"));
    }
    if reps == 0 {
        return Err(Error::domain("reps must be positive"));
    }
    let theta_cdf = ThetaCdf::new(1.0, policy)?;
    let ustar_cdf = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        match ustar_survival(x, 1.0, policy, SurvivalRoute::Termwise) {
            Ok(r) => 1.0 - r.value,
            Err(_) => 1.0,
        }
    };
    let references = rectangle_references(mc_reference_n, rng, trunc, policy)?;

    let mut reports = Vec::with_capacity(n_grid.len());
    for (idx, &n) in n_grid.iter().enumerate() {
        let run_rng = rng.substream(0x5000 + idx as u64);
        let pairs = batch_simulate(dist, n, reps, &run_rng)?;
        reports.push(report_for_pairs(
            n,
            &pairs,
            &ustar_cdf,
            &theta_cdf,
            &references,
            policy,
        )?);
    }
    Ok(reports)
}

/// Builds the weighted Monte-Carlo references for all five rectangles from
/// one shared pool of draws, partitioned deterministically.
pub fn rectangle_references(
    n: usize,
    rng: &RngStream,
    trunc: &LambdaTruncation,
    policy: &SeriesPolicy,
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let base = rng.substream(0x6000);
    let chunks: Vec<(usize, usize)> = (0..n.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(n - c * CHUNK)))
        .collect();
    let parts: Vec<Result<[(f64, f64, usize); 5]>> = chunks
        .par_iter()
        .map(|&(c, len)| {
            let mut chunk_rng = base.substream(streams::CHUNK_BASE + c as u64);
            let mut acc = [(0.0f64, 0.0f64, 0usize); 5];
            for _ in 0..len {
                let s = sample_joint_weighted(1.0, &mut chunk_rng, trunc, policy)?;
                for (slot, &(a, b)) in acc.iter_mut().zip(REFERENCE_RECTANGLES.iter()) {
                    let ind = if s.u <= a && s.theta <= b { s.weight } else { 0.0 };
                    slot.0 += ind;
                    slot.1 += ind * ind;
                    slot.2 += 1;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut totals = [(0.0f64, 0.0f64, 0usize); 5];
    for part in parts {
        let part = part?;
        for (t, p) in totals.iter_mut().zip(part.iter()) {
            t.0 += p.0;
            t.1 += p.1;
            t.2 += p.2;
        }
    }
    Ok(REFERENCE_RECTANGLES
        .iter()
        .zip(totals.iter())
        .map(|(&(a, b), &(sum, sumsq, cnt))| {
            let nf = cnt as f64;
            let mean = sum / nf;
            let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
            (a, b, mean, (var / nf).sqrt())
        })
        .collect())
}

fn report_for_pairs(
    n: usize,
    pairs: &[NormalizedPair],
    ustar_cdf: &impl Fn(f64) -> f64,
    theta_cdf: &ThetaCdf,
    references: &[(f64, f64, f64, f64)],
    policy: &SeriesPolicy,
) -> Result<GoFReport> {
    let reps = pairs.len();
    let us: Vec<f64> = pairs.iter().map(|p| p.ustar).collect();
    let th: Vec<f64> = pairs.iter().map(|p| p.theta).collect();
    let (ks_ustar, p_ustar) = ks_one_sample(&us, ustar_cdf, policy)?;
    let (ks_theta, p_theta) = ks_one_sample(&th, |x| theta_cdf.eval(x), policy)?;
    let degenerate_fraction =
        pairs.iter().filter(|p| p.degenerate).count() as f64 / reps as f64;
    let rect_errors = references
        .iter()
        .map(|&(a, b, analytic, ref_se)| {
            let hits = pairs
                .iter()
                .filter(|p| p.ustar <= a && p.theta <= b)
                .count();
            let emp = hits as f64 / reps as f64;
            let emp_se = (emp * (1.0 - emp) / reps as f64).sqrt();
            let combined = (emp_se * emp_se + ref_se * ref_se).sqrt();
            (a, b, emp, analytic, combined)
        })
        .collect();
    Ok(GoFReport {
        n,
        reps,
        ks_ustar,
        p_ustar,
        ks_theta,
        p_theta,
        degenerate_fraction,
        rect_errors,
    })
}
