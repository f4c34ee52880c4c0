use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n = {n} exceeds the enumeration cutoff of {cutoff}; use a sampler instead")]
    EnumerationCutoff { n: usize, cutoff: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid spin value {0}; spins must be -1 or +1")]
    InvalidSpin(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment table incomplete: {0}")]
    IncompleteMoments(String),

    #[error("sample source exhausted: requested {requested}, {available} remaining")]
    SourceExhausted { requested: usize, available: usize },

    #[error("no root in bracket [{lo}, {hi}]: {reason}")]
    NoRoot { lo: f64, hi: f64, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
