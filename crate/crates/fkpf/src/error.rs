//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input value object is in a state its contract forbids
    /// (e.g. an unnormalized particle set where a normalized one is required).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Every particle weight is zero (total likelihood collapse). The caller
    /// decides how to proceed; the Monte Carlo harness flags and excludes
    /// the trial.
    #[error("degenerate weights: all particle weights are zero")]
    DegenerateWeights,

    /// Inputs fall outside the hypotheses under which a bound is valid.
    #[error("out of hypothesis: {0}")]
    OutOfHypothesis(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
}
