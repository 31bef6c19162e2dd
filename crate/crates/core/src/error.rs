use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes surfaced by the library.
///
/// The CLI maps each variant to its own exit status, so new variants should
/// only be added for genuinely new classes of failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// The file decoded but uses a PNG layout we do not accept.
    #[error("unsupported image format: {0}")]
    Format(String),

    #[error(
        "patch at (row {row}, col {col}) with size {size} is out of bounds for a {height}x{width} image"
    )]
    Bounds {
        row: usize,
        col: usize,
        size: usize,
        height: usize,
        width: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
