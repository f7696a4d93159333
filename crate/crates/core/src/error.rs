use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A column required by the schema is missing, or the schema itself is inconsistent.
    #[error("schema error: {0}")]
    Schema(String),
    /// A cell could not be parsed as a number.
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    /// Data violates a domain invariant (non-finite value, treatment out of range, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// A caller-supplied argument is out of range.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The request would need exponential work beyond the configured limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A model file is malformed.
    #[error("model format error: {0}")]
    Format(String),
    #[error("unsupported model version {found}; supported versions: {supported:?}")]
    UnsupportedVersion { found: i64, supported: &'static [u32] },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
