use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt data in {path}: expected {expected} bytes, found {actual}")]
    CorruptData {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("inconsistent slice stack: {file} is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    InconsistentStack {
        file: PathBuf,
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },

    #[error("invalid preset: point {index}: {reason}")]
    InvalidPreset { index: usize, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image codec: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
