//! Derivative-free minimizers used by the estimator.

mod brent;
mod nelder_mead;

pub use brent::{minimize_scalar, ScalarMinimum};
pub use nelder_mead::{minimize_multi, BoxBounds, MultiMinimum, NelderMeadConfig, TraceEntry};
