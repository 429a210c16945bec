use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice capacity exceeded: state at time {time} already fills horizon {horizon}")]
    CapacityExceeded { time: usize, horizon: usize },

    #[error("numerical corruption: diagonal entry {value:e} at x={x}, a={a}")]
    NumericalCorruption { x: i64, a: i64, value: f64 },

    /// The requested parameters leave the first-order (small pT) regime.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("fit failure: {0}")]
    FitFailure(String),
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> WalkError {
    WalkError::InvalidArgument(msg.into())
}
