use std::path::PathBuf;

/// Errors produced by metric evaluation, simulation, and file handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {got_width}x{got_height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        got_width: usize,
        got_height: usize,
    },

    #[error("image data length {len} does not match {width}x{height}")]
    BadDataLength {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimensions must be even for spatial subsampling, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },

    #[error("image too small: need at least {min_width}x{min_height}, got {width}x{height}")]
    TooSmall {
        min_width: usize,
        min_height: usize,
        width: usize,
        height: usize,
    },

    #[error("PSNR undefined: MSE value {mse} is not positive")]
    UndefinedPsnr { mse: f64 },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn param(detail: impl Into<String>) -> Self {
        Error::InvalidParameter(detail.into())
    }
}
