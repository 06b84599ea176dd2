//! Point-cloud and scored-map file formats.
//!
//! Three input formats are read: ASCII PLY, little-endian binary PLY, and
//! plain `xyz` text. Scored maps are written as PLY (with per-point color
//! and a `graspability` property) or CSV. Byte-level format documentation
//! lives in `docs/formats.md` at the repository root.
//!
//! Positions are serialized as `double` so that a write→read round trip
//! reproduces every coordinate bit-for-bit; scores are `float` and exact
//! at that width. Non-finite input points are dropped, not treated as a
//! file error — the drop count is reported alongside the parsed cloud.

mod colormap;
mod csv;
mod ply;
mod xyz;

pub use colormap::Colormap;
pub use csv::read_scored_csv;

use crate::cloud::{PointCloud, ScoredCloud};
use crate::{Error, Result};

/// Input encodings accepted by [`parse_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudFormat {
    PlyAscii,
    PlyBinaryLe,
    Xyz,
}

/// Output encodings accepted by [`write_scored_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoredFormat {
    PlyAscii,
    PlyBinaryLe,
    Csv,
}

/// A parsed cloud plus statistics the caller may want to surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCloud {
    pub cloud: PointCloud,
    /// Points dropped because a coordinate was NaN or infinite.
    pub dropped_nonfinite: usize,
}

/// Parses a byte stream in the declared format.
///
/// Vertices are returned in file order; extra vertex properties (normals,
/// colors, intensity) are ignored. Fails with [`Error::InsufficientData`]
/// if fewer than 3 finite points remain.
pub fn parse_cloud(bytes: &[u8], format: CloudFormat) -> Result<ParsedCloud> {
    let raw = match format {
        CloudFormat::PlyAscii => ply::parse(bytes, ply::PlyFormat::Ascii)?,
        CloudFormat::PlyBinaryLe => ply::parse(bytes, ply::PlyFormat::BinaryLe)?,
        CloudFormat::Xyz => xyz::parse(bytes)?,
    };
    let total = raw.len();
    let points: Vec<_> = raw
        .into_iter()
        .filter(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite())
        .collect();
    let dropped = total - points.len();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} finite points after dropping {dropped}; at least 3 required",
            points.len()
        )));
    }
    Ok(ParsedCloud {
        cloud: PointCloud::new(points),
        dropped_nonfinite: dropped,
    })
}

/// Sniffs the format (PLY magic + declared encoding, else `xyz`) and parses.
pub fn parse_cloud_auto(bytes: &[u8]) -> Result<ParsedCloud> {
    match ply::sniff(bytes) {
        Some(ply::PlyFormat::Ascii) => parse_cloud(bytes, CloudFormat::PlyAscii),
        Some(ply::PlyFormat::BinaryLe) => parse_cloud(bytes, CloudFormat::PlyBinaryLe),
        None => parse_cloud(bytes, CloudFormat::Xyz),
    }
}

/// Serializes a bare point cloud (positions only, `double` precision).
pub fn write_cloud(cloud: &PointCloud, format: CloudFormat) -> Vec<u8> {
    match format {
        CloudFormat::PlyAscii => ply::write_cloud(cloud, ply::PlyFormat::Ascii),
        CloudFormat::PlyBinaryLe => ply::write_cloud(cloud, ply::PlyFormat::BinaryLe),
        CloudFormat::Xyz => xyz::write(cloud),
    }
}

/// Serializes a scored cloud.
///
/// PLY output carries `double x/y/z`, `uchar red/green/blue` from the
/// colormap, and a `float graspability` per vertex. CSV output has an
/// `x,y,z,g` header row.
pub fn write_scored_cloud(
    cloud: &ScoredCloud,
    format: ScoredFormat,
    colormap: Colormap,
) -> Vec<u8> {
    match format {
        ScoredFormat::PlyAscii => ply::write_scored(cloud, ply::PlyFormat::Ascii, colormap),
        ScoredFormat::PlyBinaryLe => ply::write_scored(cloud, ply::PlyFormat::BinaryLe, colormap),
        ScoredFormat::Csv => csv::write_scored(cloud),
    }
}
