//! Learning dynamics of diagonal linear state space models trained by
//! gradient descent on a frequency-domain squared loss.
//!
//! * [`spectrum`]: DFT, inverse DFT and the two squared losses.
//! * [`ssm`]: diagonal layers, frequency responses and time-domain simulation.
//! * [`suffstats`]: covariance summaries `sigma`, `eta` in two weightings.
//! * [`graddyn`]: explicit gradients, a finite-difference oracle and
//!   gradient-flow integration.
//! * [`analytic`]: closed-form trajectories and reduced ODEs.
//! * [`ode`]: fixed-step Euler and RK4.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod graddyn;
pub mod ode;
pub mod spectrum;
pub mod ssm;
pub mod suffstats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectrum::ComplexSequence;
pub use ssm::{DiagonalSsm, FrequencyResponse, StackedSsm};
