//! Machine-readable run report: one JSON object per line, one line per
//! pipeline stage, appended in execution order. Every record carries the
//! schema version so downstream readers can evolve.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const REPORT_SCHEMA: u32 = 1;

/// Collects stage records, mirroring them to a JSONL file when one is
/// configured.
#[derive(Debug)]
pub struct Report {
    command: &'static str,
    path: Option<PathBuf>,
    records: Vec<Value>,
}

impl Report {
    pub fn new(command: &'static str, path: Option<&Path>) -> Self {
        Report {
            command,
            path: path.map(Path::to_path_buf),
            records: Vec::new(),
        }
    }

    /// Appends one stage record. `fields` must be a JSON object; its keys
    /// land at the top level next to `stage` and `wall_ms`.
    pub fn stage(&mut self, stage: &str, wall_ms: f64, fields: Value) -> Result<(), CliError> {
        let mut record = Map::new();
        record.insert("schema".into(), json!(REPORT_SCHEMA));
        record.insert("command".into(), json!(self.command));
        record.insert("stage".into(), json!(stage));
        record.insert("wall_ms".into(), json!(wall_ms));
        if let Value::Object(extra) = fields {
            for (k, v) in extra {
                record.insert(k, v);
            }
        }
        let record = Value::Object(record);
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
            writeln!(file, "{record}").map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[Value] {
        &self.records
    }

    /// Wall time recorded for a stage, if it ran.
    pub fn wall_ms(&self, stage: &str) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r["stage"] == stage)
            .and_then(|r| r["wall_ms"].as_f64())
    }
}

/// Runs `f`, returning its output and the elapsed wall time in ms.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}
