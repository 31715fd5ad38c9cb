//! Likelihood-free goodness-of-fit tests for simulation-based models.
//!
//! A model is represented by a reference table of simulated particles
//! (parameters plus summary statistics). An observation is tested by
//! computing an outlier score (kNN distance or local outlier factor)
//! against the table and comparing it with scores of calibration draws:
//!
//! * [`prior_gof`]: does the observation look like a draw from the prior
//!   predictive?
//! * [`holdout`]: after approximate posterior inference on one part of
//!   the data, does a held-out part look like a posterior predictive draw?
//!
//! [`harness`] reproduces power and calibration studies on a
//! Laplace/Gaussian toy model, and [`cli`] wires everything to the
//! `sbigof` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod harness;
pub mod holdout;
pub mod neighbors;
pub mod posterior;
pub mod prior_gof;
pub mod scores;

pub use error::{Error, Result};
