//! Bayesian `(δ, α)` tolerance intervals for a future normal observation,
//! computed from posterior draws of its mean and standard deviation.
//!
//! - [`solver`]: the proposed two-sided interval (fixed or optimized center),
//!   the WKM construction, one-sided limits and expectation intervals.
//! - [`samplers`]: posterior draws for i.i.d. normal data and the one-way
//!   random-effects model, plus the fixed-effect posterior of a general LMM.
//! - [`simulation`]: coverage studies on simulated one-way data and the
//!   large-sample half-length diagnostic.
//! - [`io`] and [`cli`]: file formats and the `tolerant` command.

pub mod cli;
pub mod error;
pub mod io;
pub mod normal;
pub mod rng;
pub mod samplers;
pub mod simulation;
pub mod solver;

pub use error::{Error, Result};
