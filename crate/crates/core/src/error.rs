use thiserror::Error;

/// Errors produced by the ranking library.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV cell could not be parsed. Row and column are 1-based and refer
    /// to the physical file (the header, when present, is row 1).
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// Input violated a data invariant (non-binary label, ragged rows, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller-supplied argument was out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
