use thiserror::Error;

use crate::potential::PotentialError;

/// Errors produced by the solver modules.
#[derive(Debug, Error)]
pub enum GpeError {
    /// A parameter lies outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Domain(String),

    /// The toolkit only models attractive condensates.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("wavefunction must have unit norm (got {0:.3e}); normalize it first")]
    NotNormalized(f64),

    #[error("zero field has no normalized moments")]
    ZeroField,

    #[error("step size unstable: {0}")]
    StepSize(String),

    #[error("blowup at tau = {tau}: {detail}")]
    Blowup { tau: f64, detail: String },

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub type Result<T> = std::result::Result<T, GpeError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(GpeError::Domain(msg.into()))
}
