use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock space dimension {dimension} exceeds the configured maximum {max} ({modes} modes, cutoff {cutoff})")]
    DimensionOverflow {
        modes: usize,
        cutoff: usize,
        dimension: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("mode set must be non-empty")]
    EmptyModeSet,

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not symplectic (max deviation {deviation:.3e})")]
    NotSymplectic { deviation: f64 },

    #[error("truncation tail {tail:.3e} exceeds the allowed {allowed:.3e}; try a cutoff of at least {suggested_cutoff}")]
    TruncationTail {
        tail: f64,
        allowed: f64,
        suggested_cutoff: usize,
    },

    #[error("squeezing requires the target mode to be in vacuum")]
    ModeNotVacuum,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidGaussian(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
