use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count must be a positive odd integer, got {0}")]
    InvalidModeCount(usize),

    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeCountMismatch { expected: usize, found: usize },

    #[error("mean photon number must be finite and non-negative, got {0}")]
    NegativeOccupation(f64),

    #[error("quantization length must be finite and positive, got {0}")]
    InvalidLength(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} outside the range -{q}..={q}")]
    IndexOutOfRange { index: i64, q: usize },

    #[error("mode {0} has zero occupation; the Lambda matrix is undefined")]
    ZeroOccupation(i64),

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("Fock dimension {dimension} exceeds guardrail {limit}")]
    GuardrailExceeded { dimension: u128, limit: usize },

    #[error("cutoff {cutoff} is too small; need at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("operator and state configurations differ")]
    ConfigMismatch,

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
