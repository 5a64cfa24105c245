use thiserror::Error;

/// Errors raised by the library. Validation problems are separated from
/// numerical or statistical failures so the command line can map them to exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("insufficient padding: {0}")]
    Padding(String),
    #[error("degenerate estimate: {0}")]
    Degenerate(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
