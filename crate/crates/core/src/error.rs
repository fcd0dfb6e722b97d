use thiserror::Error;

use crate::drift::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stability index must lie in (0, 2), got {0}")]
    InvalidAlpha(f64),

    #[error("argument {value} outside the supported range of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unbound drift parameter `{0}`")]
    UnboundParameter(String),

    #[error("drift evaluated to a non-finite value ({value}) at x = {x}")]
    NonFiniteDrift { x: f64, value: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("GMRES did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("objective returned a non-finite value ({value}) at {at:?}")]
    NonFiniteObjective { at: Vec<f64>, value: f64 },

    #[error("invalid observations: {0}")]
    InvalidObservations(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),
}
