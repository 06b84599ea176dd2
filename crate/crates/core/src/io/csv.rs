//! Scored-cloud CSV: header `x,y,z,g`, then one row per point.
//!
//! Values are written with the shortest decimal form that round-trips,
//! so a read-back reproduces the stored floats exactly.

use nalgebra::Point3;

use crate::cloud::ScoredCloud;
use crate::{Error, Result};

pub fn write_scored(cloud: &ScoredCloud) -> Vec<u8> {
    let mut out = String::with_capacity(8 + cloud.len() * 32);
    out.push_str("x,y,z,g\n");
    for (p, score) in cloud.points.iter().zip(&cloud.scores) {
        out.push_str(&format!("{},{},{},{}\n", p.x, p.y, p.z, score));
    }
    out.into_bytes()
}

/// Reads a scored CSV as written by [`write_scored`] (used by the CLI
/// `extract` command to re-threshold existing score maps).
pub fn read_scored_csv(bytes: &[u8]) -> Result<ScoredCloud> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(format!("byte {}", e.valid_up_to()), "not valid UTF-8"))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,y,z,g" => {}
        Some((_, other)) => {
            return Err(Error::parse(
                "line 1",
                format!("expected header 'x,y,z,g', found '{other}'"),
            ))
        }
        None => return Err(Error::parse("line 1", "empty file")),
    }
    let mut points = Vec::new();
    let mut scores = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                format!("line {}", idx + 1),
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let mut nums = [0.0f64; 4];
        for (slot, field) in fields.iter().enumerate() {
            nums[slot] = field.trim().parse::<f64>().map_err(|_| {
                Error::parse(
                    format!("line {}", idx + 1),
                    format!("'{field}' is not a number"),
                )
            })?;
        }
        points.push(Point3::new(nums[0], nums[1], nums[2]));
        scores.push(nums[3] as f32);
    }
    ScoredCloud::new(points, scores)
}
