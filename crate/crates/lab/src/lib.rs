//! Experiment runner for linear SSM learning dynamics: synthetic data,
//! training runs, closed-form curves, comparisons and parameter sweeps.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod runs;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
