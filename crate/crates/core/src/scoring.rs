//! Graspability scoring: slide the gripper mask over the terrain array
//! and rate every candidate voxel.
//!
//! A candidate's score is the fraction of solid terrain inside its
//! mask-sized window that falls within the mask's solid region:
//! `g = matches / window_solids`, 0 for empty windows. Both counts are
//! integers, so the two engines agree bit-for-bit:
//!
//! * `Reference` walks every voxel of the window — slow, obviously
//!   correct, the oracle.
//! * `Packed` holds 64 pre-shifted copies of each mask row and ANDs them
//!   against the terrain's packed words, so one candidate costs a few
//!   word operations per mask row instead of a voxel-by-voxel walk.

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgrid::Dims;
use crate::mask::GripperMask;
use crate::terrain::{extract_window, solid_count, TerrainArray, VoxelWindow};
use crate::{Error, Result};

/// Which terrain voxels get scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// Topmost solid voxel of each column (the reachable surface).
    SurfaceVoxels,
    /// Every solid voxel, including unreachable interior ones.
    AllSolidVoxels,
}

/// Scoring implementation; results are bit-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Reference,
    Packed,
}

/// Scan configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Only voxels whose center z (meters, plane frame) is at or above
    /// this are scored. Thresholds above the terrain yield an empty
    /// candidate set, not an error.
    #[serde(default)]
    pub z_threshold: Option<f64>,
    pub policy: CandidatePolicy,
    pub engine: Engine,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            z_threshold: None,
            policy: CandidatePolicy::SurfaceVoxels,
            engine: Engine::Packed,
        }
    }
}

/// Per-voxel scores over a terrain array. Non-candidate voxels carry a
/// NaN sentinel and are reported as `None`.
#[derive(Debug, Clone)]
pub struct ScoreField {
    dims: Dims,
    origin: Point3<f64>,
    c_mm: f64,
    scores: Vec<f32>,
}

impl ScoreField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn c_mm(&self) -> f64 {
        self.c_mm
    }

    #[inline]
    fn linear(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims.1 + y) * self.dims.0 + x
    }

    /// Score of a candidate voxel, `None` for non-candidates.
    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<f32> {
        let v = self.scores[self.linear(x, y, z)];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    pub fn is_candidate(&self, x: usize, y: usize, z: usize) -> bool {
        !self.scores[self.linear(x, y, z)].is_nan()
    }

    /// Raw per-voxel values in linear order (x fastest), NaN = sentinel.
    pub fn raw(&self) -> &[f32] {
        &self.scores
    }

    pub fn candidate_count(&self) -> usize {
        self.scores.iter().filter(|v| !v.is_nan()).count()
    }

    /// Candidates in ascending linear-index order.
    pub fn iter_candidates(&self) -> impl Iterator<Item = ((usize, usize, usize), f32)> + '_ {
        let (nx, ny, _) = self.dims;
        self.scores.iter().enumerate().filter_map(move |(i, &v)| {
            if v.is_nan() {
                None
            } else {
                let x = i % nx;
                let y = (i / nx) % ny;
                let z = i / (nx * ny);
                Some(((x, y, z), v))
            }
        })
    }

    /// Highest-scoring candidate; ties resolve to the lowest linear index.
    pub fn argmax(&self) -> Option<((usize, usize, usize), f32)> {
        let mut best: Option<((usize, usize, usize), f32)> = None;
        for (idx, v) in self.iter_candidates() {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
        best
    }

    /// World-space voxel center, same convention as the terrain array.
    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Point3<f64> {
        let c = self.c_mm / 1000.0;
        Point3::new(
            self.origin.x + (x as f64 + 0.5) * c,
            self.origin.y + (y as f64 + 0.5) * c,
            self.origin.z + (z as f64 + 0.5) * c,
        )
    }
}

/// One graspable point: voxel index, world center, score.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspPoint {
    pub index: (usize, usize, usize),
    pub position: Point3<f64>,
    pub score: f32,
}

/// Candidates at or above the score threshold, ordered by descending
/// score, ties by ascending linear voxel index.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspableSet {
    pub points: Vec<GraspPoint>,
    pub threshold: f32,
}

#[inline]
fn ratio(matches: u64, window_solids: u64) -> f32 {
    if window_solids == 0 {
        0.0
    } else {
        matches as f32 / window_solids as f32
    }
}

fn reference_counts(window: &VoxelWindow<'_>, mask: &GripperMask) -> (u64, u64) {
    let (mx, my, mz) = mask.dims();
    let mut matches = 0;
    let mut solids = 0;
    for z in 0..mz {
        for y in 0..my {
            for x in 0..mx {
                if window.get(x, y, z) {
                    solids += 1;
                    if mask.get(x, y, z) {
                        matches += 1;
                    }
                }
            }
        }
    }
    (matches, solids)
}

/// Scores one window against the mask: the fraction of the window's
/// solid voxels that lie inside the mask's solid region. Empty windows
/// score 0.
pub fn score_voxel(window: &VoxelWindow<'_>, mask: &GripperMask) -> Result<f32> {
    if window.dims() != mask.dims() {
        return Err(Error::InvalidParameter(format!(
            "window dims {:?} do not match mask dims {:?}",
            window.dims(),
            mask.dims()
        )));
    }
    let (matches, solids) = reference_counts(window, mask);
    Ok(ratio(matches, solids))
}

/// Mask rows replicated at all 64 bit shifts, for word-aligned ANDs.
struct PackedMask {
    rows: usize,
    words_per_row: usize,
    /// `shifted[s]` holds every mask row shifted left by `s` bits,
    /// row-major (z, then y), `words_per_row` words each.
    shifted: Vec<Vec<u64>>,
}

impl PackedMask {
    fn build(mask: &GripperMask) -> Self {
        let (_, my, mz) = mask.dims();
        let row_words = mask.occupancy().row_words();
        let words_per_row = row_words + 1;
        let rows = my * mz;
        let mut shifted = Vec::with_capacity(64);
        for s in 0..64 {
            let mut variant = vec![0u64; rows * words_per_row];
            for z in 0..mz {
                for y in 0..my {
                    let src = mask.occupancy().row(y, z);
                    let dst = &mut variant[(z * my + y) * words_per_row..][..words_per_row];
                    if s == 0 {
                        dst[..row_words].copy_from_slice(src);
                    } else {
                        let mut carry = 0u64;
                        for (w, &bits) in src.iter().enumerate() {
                            dst[w] = (bits << s) | carry;
                            carry = bits >> (64 - s);
                        }
                        dst[row_words] = carry;
                    }
                }
            }
            shifted.push(variant);
        }
        PackedMask {
            rows,
            words_per_row,
            shifted,
        }
    }

    /// Numerator: solids common to mask and terrain for the window at
    /// `corner`. Out-of-bounds rows and words read as void.
    fn matches(&self, terrain: &TerrainArray, mask_dims: Dims, corner: (i64, i64, i64)) -> u64 {
        let (_, my, mz) = mask_dims;
        debug_assert_eq!(self.rows, my * mz);
        let (_, tny, tnz) = terrain.dims();
        let occ = terrain.occupancy();
        let t_row_words = occ.row_words() as i64;
        let b0 = corner.0.div_euclid(64);
        let s = corner.0.rem_euclid(64) as usize;
        let variant = &self.shifted[s];

        let mut matches = 0u64;
        for z in 0..mz {
            let tz = corner.2 + z as i64;
            if tz < 0 || tz >= tnz as i64 {
                continue;
            }
            for y in 0..my {
                let ty = corner.1 + y as i64;
                if ty < 0 || ty >= tny as i64 {
                    continue;
                }
                let trow = occ.row(ty as usize, tz as usize);
                let mrow = &variant[(z * my + y) * self.words_per_row..][..self.words_per_row];
                let w_lo = (-b0).max(0) as usize;
                let w_hi = (t_row_words - b0).clamp(0, self.words_per_row as i64) as usize;
                for w in w_lo..w_hi {
                    matches +=
                        (mrow[w] & trow[(b0 + w as i64) as usize]).count_ones() as u64;
                }
            }
        }
        matches
    }
}

fn candidate_columns_by_layer(
    terrain: &TerrainArray,
    opts: &ScanOptions,
) -> Vec<Vec<(usize, usize)>> {
    let (nx, ny, nz) = terrain.dims();
    let c = terrain.c_meters();
    let layer_passes = |z: usize| -> bool {
        match opts.z_threshold {
            None => true,
            Some(thr) => terrain.origin().z + (z as f64 + 0.5) * c >= thr,
        }
    };
    let mut layers = vec![Vec::new(); nz];
    match opts.policy {
        CandidatePolicy::SurfaceVoxels => {
            for (col, top) in terrain.surface_layers().into_iter().enumerate() {
                if let Some(z) = top {
                    if layer_passes(z) {
                        layers[z].push((col % nx, col / nx));
                    }
                }
            }
        }
        CandidatePolicy::AllSolidVoxels => {
            for z in 0..nz {
                if !layer_passes(z) {
                    continue;
                }
                for y in 0..ny {
                    for x in 0..nx {
                        if terrain.get(x, y, z) {
                            layers[z].push((x, y));
                        }
                    }
                }
            }
        }
    }
    layers
}

/// Scores every candidate voxel of the terrain.
///
/// The mask pivot is placed on the candidate, the mask-sized window is
/// extracted (void-padded at borders) and scored. Layers are processed
/// in parallel; every candidate's value is independent, so the result
/// does not depend on the degree of parallelism.
pub fn assess_terrain(
    terrain: &TerrainArray,
    mask: &GripperMask,
    opts: &ScanOptions,
) -> Result<ScoreField> {
    if terrain.c_mm() != mask.c_mm() {
        return Err(Error::InvalidParameter(format!(
            "terrain voxel size {} mm does not match mask voxel size {} mm",
            terrain.c_mm(),
            mask.c_mm()
        )));
    }
    if let Some(thr) = opts.z_threshold {
        if !thr.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "z threshold must be finite, got {thr}"
            )));
        }
    }

    let (nx, ny, nz) = terrain.dims();
    let mask_dims = mask.dims();
    let (px, py, pz) = mask.pivot();
    let layers = candidate_columns_by_layer(terrain, opts);
    let packed = match opts.engine {
        Engine::Packed => Some(PackedMask::build(mask)),
        Engine::Reference => None,
    };

    let mut scores = vec![f32::NAN; nx * ny * nz];
    scores
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(z, chunk)| {
            for &(x, y) in &layers[z] {
                let corner = (
                    x as i64 - px as i64,
                    y as i64 - py as i64,
                    z as i64 - pz as i64,
                );
                let g = match &packed {
                    Some(pm) => {
                        let matches = pm.matches(terrain, mask_dims, corner);
                        let solids = solid_count(&extract_window(terrain, corner, mask_dims));
                        ratio(matches, solids)
                    }
                    None => {
                        let window = extract_window(terrain, corner, mask_dims);
                        let (matches, solids) = reference_counts(&window, mask);
                        ratio(matches, solids)
                    }
                };
                chunk[y * nx + x] = g;
            }
        });

    Ok(ScoreField {
        dims: (nx, ny, nz),
        origin: terrain.origin(),
        c_mm: terrain.c_mm(),
        scores,
    })
}

/// Candidates scoring at least `g_hat`, descending by score, ties by
/// ascending linear voxel index.
pub fn extract_graspable(field: &ScoreField, g_hat: f32) -> Result<GraspableSet> {
    if !(0.0..=1.0).contains(&g_hat) {
        return Err(Error::InvalidParameter(format!(
            "score threshold must be in [0, 1], got {g_hat}"
        )));
    }
    let (nx, ny, _) = field.dims();
    let mut points: Vec<GraspPoint> = field
        .iter_candidates()
        .filter(|&(_, g)| g >= g_hat)
        .map(|((x, y, z), g)| GraspPoint {
            index: (x, y, z),
            position: field.voxel_center(x, y, z),
            score: g,
        })
        .collect();
    points.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then_with(|| {
            let la = (a.index.2 * ny + a.index.1) * nx + a.index.0;
            let lb = (b.index.2 * ny + b.index.1) * nx + b.index.0;
            la.cmp(&lb)
        })
    });
    Ok(GraspableSet {
        points,
        threshold: g_hat,
    })
}

/// One point per candidate voxel at its world-space center, carrying its
/// score; linear voxel order. An empty candidate set gives an empty
/// cloud.
pub fn scored_cloud_from_field(
    field: &ScoreField,
    terrain: &TerrainArray,
) -> crate::cloud::ScoredCloud {
    debug_assert_eq!(field.dims(), terrain.dims());
    let mut points = Vec::with_capacity(field.candidate_count());
    let mut scores = Vec::with_capacity(points.capacity());
    for ((x, y, z), g) in field.iter_candidates() {
        points.push(terrain.voxel_center(x, y, z));
        scores.push(g);
    }
    crate::cloud::ScoredCloud::new(points, scores).expect("candidate scores are finite in [0,1]")
}
