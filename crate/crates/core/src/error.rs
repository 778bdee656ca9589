use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of a model (e.g. non-positive visibility).
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid arguments or configuration supplied by the caller.
    #[error("usage error: {0}")]
    Usage(String),
    /// A configuration key was unknown or carried an invalid value.
    #[error("invalid configuration key `{key}`: {reason}")]
    ConfigKey { key: String, reason: String },
    /// Dimension mismatch between operands.
    #[error("shape error: {0}")]
    Shape(String),
    #[error("variable `{0}` has zero variance")]
    DegenerateVariable(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    Convergence { sweeps: usize },
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("actual value at index {index} is zero; MAPE is undefined")]
    ZeroActual { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
