//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by model construction, analytics, and simulation.
#[derive(Debug, Error)]
pub enum Hw2fError {
    /// A precondition on the inputs was violated (bad domain, bad
    /// configuration, misuse of a parameterization).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quantity required for the requested result is numerically
    /// degenerate (zero variance, constant series, vanishing loading).
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// A calibration target lies outside the achievable range.
    #[error("unattainable target {target}: achievable minimum is {achievable_min}")]
    UnattainableTarget { target: f64, achievable_min: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Hw2fError>;

impl Hw2fError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Hw2fError::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Hw2fError::Degenerate(msg.into())
    }
}
