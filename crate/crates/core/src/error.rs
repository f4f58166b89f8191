use thiserror::Error;

/// Errors produced by network construction, evaluation, learning and reporting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("incompatible dimensions: {0}")]
    Incompatible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("capability unavailable: {0}")]
    Capability(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}
