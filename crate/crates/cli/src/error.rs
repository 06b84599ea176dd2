//! CLI error type with the exit-code contract:
//! 0 success, 2 invalid config or parameters, 3 I/O or parse failure,
//! 4 computation failure.

use std::path::PathBuf;

use graspmap_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_COMPUTE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Config file or flag values rejected before any work started.
    #[error("{0}")]
    Config(String),

    /// A pipeline stage failed; the stage name points at the culprit.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        source: CoreError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// The two scoring engines disagreed on the same inputs.
    #[error("engine checksum mismatch at c = {c_mm} mm: packed {packed:#018x} vs reference {reference:#018x}")]
    ChecksumMismatch {
        c_mm: f64,
        packed: u64,
        reference: u64,
    },
}

impl CliError {
    pub fn stage(stage: &'static str, source: CoreError) -> Self {
        CliError::Stage { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::ChecksumMismatch { .. } => EXIT_COMPUTE,
            CliError::Stage { source, .. } => match source {
                CoreError::InvalidParameter(_)
                | CoreError::InvalidSpec(_)
                | CoreError::OutOfExtent(_) => EXIT_CONFIG,
                CoreError::Parse { .. } | CoreError::UnsupportedFormat(_) | CoreError::Io(_) => {
                    EXIT_IO
                }
                CoreError::InsufficientData(_) | CoreError::DegenerateGeometry(_) => EXIT_COMPUTE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
