use thiserror::Error;

pub type Result<T> = std::result::Result<T, PvError>;

#[derive(Debug, Error)]
pub enum PvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate draw: Bernoulli-Rademacher vector of length {len} is all zero")]
    DegenerateDraw { len: usize },

    #[error("basis is rank deficient at column {column} (|R_jj| = {magnitude:e})")]
    RankDeficient { column: usize, magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("brute-force guard: {0}")]
    GuardViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid<S: Into<String>>(msg: S) -> PvError {
    PvError::InvalidParameter(msg.into())
}
