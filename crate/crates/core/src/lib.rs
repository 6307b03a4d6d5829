//! Laws of the largest complete excursion of a reflected Brownian motion
//! stopped at a fixed time, and of its discrete (Lindley-process) analogue.
//!
//! The library has five layers:
//!
//! * [`series`] — closed-form densities, distribution functions and Laplace
//!   transforms evaluated by controlled alternating-series summation and
//!   one-dimensional quadrature,
//! * [`samplers`] — deterministic, seedable generation of every random
//!   ingredient of the weighted representation of the excursion pair,
//! * [`joint`] — weighted Monte-Carlo estimators for expectations, rectangle
//!   probabilities and the joint density of the pair `(U*(t), θ*(t))`,
//! * [`lindley`] — simulation of the Lindley walk and extraction of its
//!   complete-excursion statistics,
//! * [`convergence`] — goodness-of-fit machinery validating that the
//!   normalized discrete statistics converge to the continuous laws.
//!
//! All randomness flows through [`rng::RngStream`], a counter-based splittable
//! stream: runs are bit-reproducible for a fixed seed regardless of thread
//! count.

pub mod convergence;
pub mod error;
pub mod joint;
pub mod lindley;
pub mod policy;
pub mod quad;
pub mod rng;
pub mod samplers;
pub mod series;

pub use error::{Error, Result};
pub use joint::MonteCarloEstimate;
pub use lindley::{ExcursionRecord, LindleyPath, StepDistribution};
pub use policy::{EvalResult, SeriesPolicy};
pub use rng::RngStream;
pub use samplers::{LambdaTruncation, WeightedSample};
