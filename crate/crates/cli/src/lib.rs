//! Library side of the `graspmap` binary: config schema, run reports,
//! and the subcommand implementations. Kept as a library so integration
//! tests can drive commands directly as well as through the binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{
    cmd_bench, cmd_extract, cmd_mask_dump, cmd_score, cmd_synth, engine_name, score_checksum,
    BenchRow, MaskInfo, ScoreSummary,
};
pub use config::{InputFormat, OutputConfig, Overrides, RunConfig, ScanConfig, VoxelConfig};
pub use error::{CliError, CliResult, EXIT_COMPUTE, EXIT_CONFIG, EXIT_IO, EXIT_OK};
pub use report::{timed, Report, REPORT_SCHEMA};
