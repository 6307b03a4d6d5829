//! Truncation and tolerance contracts for the series kernels.

use crate::error::{Error, Result};

/// Truncation/tolerance contract applied to every series evaluation and to
/// the quadratures derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    /// Absolute truncation tolerance.
    pub abs_tol: f64,
    /// Hard cap on the number of summed terms.
    pub max_terms: usize,
    /// Node count for fixed Gauss-Legendre quadratures.
    pub quadrature_points: usize,
}

impl SeriesPolicy {
    pub fn new(abs_tol: f64, max_terms: usize, quadrature_points: usize) -> Result<Self> {
        let policy = SeriesPolicy {
            abs_tol,
            max_terms,
            quadrature_points,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::domain("abs_tol must be > 0"));
        }
        if self.max_terms < 8 {
            return Err(Error::domain("max_terms must be >= 8"));
        }
        if self.quadrature_points < 16 {
            return Err(Error::domain("quadrature_points must be >= 16"));
        }
        Ok(())
    }
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            abs_tol: 1e-10,
            max_terms: 200_000,
            quadrature_points: 128,
        }
    }
}

/// Outcome of one series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Estimated absolute error (truncation bound plus a rounding floor).
    pub est_error: f64,
    pub terms_used: usize,
}

impl EvalResult {
    pub fn exact(value: f64) -> Self {
        EvalResult {
            value,
            est_error: 0.0,
            terms_used: 0,
        }
    }
}

/// Extracts `(value, est_error)` from either a successful evaluation or an
/// accuracy failure that still carries a usable partial value. Any other
/// error is passed through.
pub fn value_lenient(res: Result<EvalResult>) -> Result<(f64, f64)> {
    match res {
        Ok(r) => Ok((r.value, r.est_error)),
        Err(Error::Accuracy {
            value, est_error, ..
        }) => Ok((value, est_error)),
        Err(e) => Err(e),
    }
}
