//! The Lindley process of a centered random walk and its complete-excursion
//! statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{streams, RngStream};

/// Step law of the driving walk; every variant is centered with unit
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepDistribution {
    /// Fair ±1 steps.
    Rademacher,
    /// Standard normal steps.
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    UniformCentered,
}

impl StepDistribution {
    #[inline]
    pub fn draw(self, rng: &mut RngStream) -> f64 {
        match self {
            StepDistribution::Rademacher => rng.rademacher(),
            StepDistribution::Gaussian => rng.standard_normal(),
            StepDistribution::UniformCentered => {
                (2.0 * rng.open01() - 1.0) * 3f64.sqrt()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StepDistribution::Rademacher => "rademacher",
            StepDistribution::Gaussian => "gaussian",
            StepDistribution::UniformCentered => "uniform",
        }
    }
}

/// A realized walk increment sequence together with its reflected path.
#[derive(Debug, Clone, PartialEq)]
pub struct LindleyPath {
    /// Increments `ε₁ .. ε_n`.
    pub steps: Vec<f64>,
    /// Reflected values `U₀ .. U_n`, with `U₀ = 0`.
    pub u: Vec<f64>,
}

/// Complete-excursion statistics of one path, all indices into `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionRecord {
    /// Last zero of the path.
    pub g_n: usize,
    /// Height of the highest complete excursion.
    pub ustar: f64,
    /// Last index at or before `g_n` attaining `ustar`.
    pub fstar: usize,
    /// Last zero at or before `fstar`.
    pub gstar: usize,
    /// First zero at or after `fstar`.
    pub dstar: usize,
    /// `fstar - gstar`.
    pub thetastar: usize,
    /// True when no complete excursion exists (`ustar = 0`).
    pub degenerate: bool,
}

/// One normalized observation from [`batch_simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPair {
    /// `U*_n / sqrt(n)`.
    pub ustar: f64,
    /// `θ*_n / n`.
    pub theta: f64,
    pub degenerate: bool,
}

/// Runs the reflected recursion `U_{k+1} = max(U_k + ε_{k+1}, 0)`.
pub fn lindley_path(steps: &[f64]) -> LindleyPath {
    let mut u = Vec::with_capacity(steps.len() + 1);
    u.push(0.0);
    let mut cur = 0.0f64;
    for &e in steps {
        cur = (cur + e).max(0.0);
        u.push(cur);
    }
    LindleyPath {
        steps: steps.to_vec(),
        u,
    }
}

/// Extracts the complete-excursion statistics of a path.
///
/// Ties in the running maximum are broken by the *last* attaining index,
/// matching the discrete definition of `f*_n`. A path whose reflected values
/// are all zero up to the last zero carries no complete excursion and is
/// flagged degenerate with `fstar = gstar = dstar = g_n`.
pub fn excursion_stats(path: &LindleyPath) -> Result<ExcursionRecord> {
    let u = &path.u;
    if u.is_empty() {
        return Err(Error::domain("excursion_stats requires a nonempty path"));
    }
    let g_n = match u.iter().rposition(|&v| v == 0.0) {
        Some(i) => i,
        None => return Err(Error::Internal("reflected path has no zero".into())),
    };
    let mut ustar = 0.0f64;
    let mut fstar = 0usize;
    for (k, &v) in u[..=g_n].iter().enumerate() {
        if v >= ustar && v > 0.0 {
            ustar = v;
            fstar = k;
        }
    }
    if ustar == 0.0 {
        return Ok(ExcursionRecord {
            g_n,
            ustar: 0.0,
            fstar: g_n,
            gstar: g_n,
            dstar: g_n,
            thetastar: 0,
            degenerate: true,
        });
    }
    let gstar = u[..=fstar]
        .iter()
        .rposition(|&v| v == 0.0)
        .ok_or_else(|| Error::Internal("no zero before the excursion peak".into()))?;
    let dstar = fstar
        + u[fstar..=g_n]
            .iter()
            .position(|&v| v == 0.0)
            .ok_or_else(|| Error::Internal("no zero after the excursion peak".into()))?;
    Ok(ExcursionRecord {
        g_n,
        ustar,
        fstar,
        gstar,
        dstar,
        thetastar: fstar - gstar,
        degenerate: false,
    })
}

/// Normalizes a record of a length-`m` path to the Donsker scale
/// `(U*_m / sqrt(m), θ*_m / m)`.
pub fn normalize(record: &ExcursionRecord, m: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::domain("normalize requires a positive path length"));
    }
    Ok((
        record.ustar / (m as f64).sqrt(),
        record.thetastar as f64 / m as f64,
    ))
}

/// Simulates `reps` independent walks of length `n` and returns their
/// normalized excursion pairs, degenerate ones included and flagged.
///
/// Work is partitioned over derived streams in fixed-size blocks, so the
/// output is identical for every thread count.
pub fn batch_simulate(
    dist: StepDistribution,
    n: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<Vec<NormalizedPair>> {
    if n == 0 {
        return Err(Error::domain("batch_simulate requires n >= 1"));
    }
    if reps == 0 {
        return Err(Error::domain("batch_simulate requires reps >= 1"));
    }
    let base = rng.substream(streams::LINDLEY);
    let block = 64usize;
    let blocks: Vec<(usize, usize)> = (0..reps.div_ceil(block))
        .map(|b| (b, block.min(reps - b * block)))
        .collect();
    let parts: Vec<Result<Vec<NormalizedPair>>> = blocks
        .par_iter()
        .map(|&(b, len)| {
            let mut block_rng = base.substream(streams::CHUNK_BASE + b as u64);
            let mut out = Vec::with_capacity(len);
            let mut steps = vec![0.0f64; n];
            for _ in 0..len {
                for s in steps.iter_mut() {
                    *s = dist.draw(&mut block_rng);
                }
                let path = lindley_path(&steps);
                let record = excursion_stats(&path)?;
                let (us, th) = normalize(&record, n)?;
                out.push(NormalizedPair {
                    ustar: us,
                    theta: th,
                    degenerate: record.degenerate,
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(reps);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_recursion() {
        let path = lindley_path(&[1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0]);
        assert_eq!(path.u, vec![0.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn all_negative_steps_pin_the_path_at_zero() {
        let path = lindley_path(&[-1.0; 12]);
        assert!(path.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_checked_excursion_statistics() {
        let path = lindley_path(&[1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0]);
        let rec = excursion_stats(&path).unwrap();
        assert_eq!(rec.g_n, 6);
        assert_eq!(rec.ustar, 2.0);
        assert_eq!(rec.fstar, 4);
        assert_eq!(rec.gstar, 2);
        assert_eq!(rec.dstar, 6);
        assert_eq!(rec.thetastar, 2);
        assert!(!rec.degenerate);
    }

    #[test]
    fn walk_that_never_returns_is_degenerate() {
        let path = lindley_path(&[1.0; 16]);
        let rec = excursion_stats(&path).unwrap();
        assert_eq!(rec.g_n, 0);
        assert_eq!(rec.ustar, 0.0);
        assert!(rec.degenerate);
        assert_eq!(normalize(&rec, 16).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn normalization_arithmetic() {
        let rec = ExcursionRecord {
            g_n: 6,
            ustar: 2.0,
            fstar: 4,
            gstar: 2,
            dstar: 6,
            thetastar: 2,
            degenerate: false,
        };
        let (a, b) = normalize(&rec, 7).unwrap();
        assert_eq!(a, 2.0 / 7f64.sqrt());
        assert_eq!(b, 2.0 / 7.0);
        assert!(normalize(&rec, 0).is_err());
    }

    #[test]
    fn single_step_paths_have_no_complete_excursion() {
        for steps in [[1.0], [-1.0]] {
            let rec = excursion_stats(&lindley_path(&steps)).unwrap();
            assert!(rec.degenerate);
            assert_eq!(normalize(&rec, 1).unwrap(), (0.0, 0.0));
        }
    }

    #[test]
    fn batch_is_deterministic_and_flags_degenerates() {
        let rng = RngStream::new(77, 0);
        let a = batch_simulate(StepDistribution::Rademacher, 128, 300, &rng).unwrap();
        let b = batch_simulate(StepDistribution::Rademacher, 128, 300, &rng).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().any(|p| !p.degenerate));
        for p in &a {
            assert!(p.ustar >= 0.0);
            assert!(p.theta >= 0.0 && p.theta <= 1.0);
            if p.degenerate {
                assert_eq!((p.ustar, p.theta), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn rademacher_paths_take_integer_values() {
        let rng = RngStream::new(5, 0);
        let mut stream = rng.substream(1);
        let steps: Vec<f64> = (0..512).map(|_| StepDistribution::Rademacher.draw(&mut stream)).collect();
        let path = lindley_path(&steps);
        assert!(path.u.iter().all(|&v| v.fract() == 0.0 && v >= 0.0));
    }

    #[test]
    fn concatenating_a_path_never_lowers_the_running_max() {
        let rng = RngStream::new(8675309, 0);
        let mut stream = rng.substream(2);
        for _ in 0..50 {
            let steps: Vec<f64> = (0..64).map(|_| StepDistribution::Gaussian.draw(&mut stream)).collect();
            let doubled: Vec<f64> = steps.iter().chain(steps.iter()).copied().collect();
            let one = excursion_stats(&lindley_path(&steps)).unwrap();
            let two = excursion_stats(&lindley_path(&doubled)).unwrap();
            assert!(two.ustar >= one.ustar);
        }
    }
}
