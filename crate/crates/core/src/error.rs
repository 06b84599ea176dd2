//! Error type shared by all pipeline stages.

use thiserror::Error;

/// Errors produced by parsing, preprocessing, voxelization and scoring.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input stream; carries the line (text formats) or byte
    /// offset (binary formats) where parsing stopped.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// The stream is valid but uses a layout this crate does not read
    /// (e.g. big-endian PLY, vertex element without float x/y/z).
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Fewer usable points than the downstream stage needs.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Geometry that admits no plane fit or triangulation
    /// (collinear points, empty grids).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A parameter violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A synthetic scene specification that cannot be realized
    /// (overlapping features, non-positive density).
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    /// Query outside the generated scene extent.
    #[error("out of extent: {0}")]
    OutOfExtent(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
