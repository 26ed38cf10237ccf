use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("generator rows are linearly dependent over GF(2) (rank deficiency at row {row})")]
    RankDeficient { row: usize },
    #[error("code has {k} generators but length {n}")]
    DimensionExceedsLength { k: usize, n: usize },
    #[error("generator length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("code length {n} exceeds cap {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a valid linear-code weight enumerator: {0}")]
    InvalidEnumerator(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("channel kind mismatch: expected {expected}, got {got}")]
    WrongChannel { expected: String, got: String },
    #[error("step-size instability: {0}")]
    StepSize(String),
    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
    #[error("estimation failed: {0}")]
    EstimationFailed(String),
    #[error("non-Hermitian input: {0}")]
    NonHermitian(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 numerical invariant, 4 estimation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvariantViolation(_) | Error::StepSize(_) => 3,
            Error::EstimationFailed(_) => 4,
            _ => 2,
        }
    }
}
