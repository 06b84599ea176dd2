//! Voxelization of the height grid into a boolean terrain array, and
//! windowed views into it.
//!
//! Each height-grid cell becomes one (x, y) voxel column. The voxel
//! containing the cell's surface height is marked solid; `Filled` mode
//! additionally marks every voxel below it. Columns outside the convex
//! hull of the input stay void. The z origin sits one voxel below the
//! lowest surface point and the array extends at least one voxel above
//! the highest, so windows centered on surface voxels always have room.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::bitgrid::{BitGrid3, Dims};
use crate::preprocess::HeightGrid;
use crate::{Error, Result};

/// How a column's interior is labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMode {
    /// Only the voxel containing the surface height is solid.
    Shell,
    /// The surface voxel and everything below it are solid.
    Filled,
}

/// Bit-packed boolean terrain `T`, 1 = solid, 0 = void.
///
/// Voxel `(x, y, z)` spans `origin + (x, y, z)·c .. origin + (x+1, y+1,
/// z+1)·c` in the regression-plane frame, with `c` converted to meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainArray {
    occupancy: BitGrid3,
    c_mm: f64,
    origin: Point3<f64>,
    mode: FillMode,
}

impl TerrainArray {
    /// Wraps an existing occupancy grid. Used by the dump-file loader and
    /// by tests that build terrains directly.
    pub fn from_occupancy(
        occupancy: BitGrid3,
        c_mm: f64,
        origin: Point3<f64>,
        mode: FillMode,
    ) -> Result<Self> {
        if !(c_mm > 0.0) || !c_mm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "voxel size must be positive, got {c_mm} mm"
            )));
        }
        if !origin.coords.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "terrain origin must be finite, got {origin:?}"
            )));
        }
        Ok(TerrainArray {
            occupancy,
            c_mm,
            origin,
            mode,
        })
    }

    pub fn dims(&self) -> Dims {
        self.occupancy.dims()
    }

    pub fn c_mm(&self) -> f64 {
        self.c_mm
    }

    /// Voxel edge length in meters.
    pub fn c_meters(&self) -> f64 {
        self.c_mm / 1000.0
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn mode(&self) -> FillMode {
        self.mode
    }

    pub fn occupancy(&self) -> &BitGrid3 {
        &self.occupancy
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy.get(x, y, z)
    }

    pub fn solid_total(&self) -> u64 {
        self.occupancy.count_ones()
    }

    /// World-space center of a voxel.
    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Point3<f64> {
        let c = self.c_meters();
        Point3::new(
            self.origin.x + (x as f64 + 0.5) * c,
            self.origin.y + (y as f64 + 0.5) * c,
            self.origin.z + (z as f64 + 0.5) * c,
        )
    }

    /// Topmost solid z per column, `None` for all-void columns.
    pub fn surface_layers(&self) -> Vec<Option<usize>> {
        let (nx, ny, nz) = self.dims();
        let mut top = vec![None; nx * ny];
        for y in 0..ny {
            for x in 0..nx {
                for z in (0..nz).rev() {
                    if self.occupancy.get(x, y, z) {
                        top[y * nx + x] = Some(z);
                        break;
                    }
                }
            }
        }
        top
    }

    pub fn window(&self, corner: (i64, i64, i64), dims: Dims) -> VoxelWindow<'_> {
        extract_window(self, corner, dims)
    }
}

/// Zero-copy view of a `dims`-sized box anchored at `corner` (which may
/// lie outside the array); reads beyond the array return void.
#[derive(Debug, Clone, Copy)]
pub struct VoxelWindow<'a> {
    terrain: &'a TerrainArray,
    corner: (i64, i64, i64),
    dims: Dims,
}

impl<'a> VoxelWindow<'a> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn corner(&self) -> (i64, i64, i64) {
        self.corner
    }

    pub fn terrain(&self) -> &'a TerrainArray {
        self.terrain
    }

    /// Voxel at window-local coordinates, void-padded.
    #[inline]
    pub fn get(&self, wx: usize, wy: usize, wz: usize) -> bool {
        debug_assert!(wx < self.dims.0 && wy < self.dims.1 && wz < self.dims.2);
        let (tx, ty, tz) = (
            self.corner.0 + wx as i64,
            self.corner.1 + wy as i64,
            self.corner.2 + wz as i64,
        );
        let (nx, ny, nz) = self.terrain.dims();
        if tx < 0 || ty < 0 || tz < 0 || tx >= nx as i64 || ty >= ny as i64 || tz >= nz as i64 {
            return false;
        }
        self.terrain.get(tx as usize, ty as usize, tz as usize)
    }
}

/// Builds the terrain array from an interpolated height grid.
///
/// The grid pitch must equal the voxel size (the preprocessing stage is
/// expected to resample at `c`); columns then map one-to-one onto grid
/// cells. The lateral origin is the grid origin; the z origin is the
/// minimum surface height minus one voxel.
pub fn create_terrain_array(grid: &HeightGrid, c_mm: f64, mode: FillMode) -> Result<TerrainArray> {
    if !(c_mm > 0.0) || !c_mm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "voxel size must be positive, got {c_mm} mm"
        )));
    }
    let c = c_mm / 1000.0;
    if (grid.pitch() - c).abs() > 1e-9 * c.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid pitch {} m does not match voxel size {} m; resample the grid at c",
            grid.pitch(),
            c
        )));
    }
    let Some((min_z, max_z)) = grid.height_range() else {
        return Err(Error::InsufficientData(
            "height grid has no valid cells".into(),
        ));
    };

    let origin_z = min_z - c;
    let nz = ((max_z - min_z) / c + 1.0).floor() as usize + 2;
    let (nx, ny) = grid.dims();
    let mut occupancy = BitGrid3::new((nx, ny, nz));
    for iy in 0..ny {
        for ix in 0..nx {
            let Some(h) = grid.get(ix, iy) else { continue };
            let kz = ((h - origin_z) / c).floor() as usize;
            debug_assert!(kz < nz, "surface voxel {kz} outside {nz} layers");
            match mode {
                FillMode::Shell => occupancy.set(ix, iy, kz, true),
                FillMode::Filled => {
                    for z in 0..=kz {
                        occupancy.set(ix, iy, z, true);
                    }
                }
            }
        }
    }
    let (gx, gy) = grid.origin();
    TerrainArray::from_occupancy(occupancy, c_mm, Point3::new(gx, gy, origin_z), mode)
}

/// View of `T` anchored at `corner`. All corners are legal: reads outside
/// the array are void-padded, so pivots near borders need no special case.
pub fn extract_window(terrain: &TerrainArray, corner: (i64, i64, i64), dims: Dims) -> VoxelWindow<'_> {
    VoxelWindow {
        terrain,
        corner,
        dims,
    }
}

/// Number of solid voxels in the window, by popcount over packed words
/// with edge masking. For a {0,1} array this equals the squared Frobenius
/// norm, the score denominator.
pub fn solid_count(window: &VoxelWindow<'_>) -> u64 {
    let (wx, wy, wz) = window.dims;
    let (_, ny, nz) = window.terrain.dims();
    let occ = window.terrain.occupancy();
    let mut count = 0;
    for dz in 0..wz {
        let tz = window.corner.2 + dz as i64;
        if tz < 0 || tz >= nz as i64 {
            continue;
        }
        for dy in 0..wy {
            let ty = window.corner.1 + dy as i64;
            if ty < 0 || ty >= ny as i64 {
                continue;
            }
            count += occ.range_count(
                ty as usize,
                tz as usize,
                window.corner.0,
                window.corner.0 + wx as i64,
            );
        }
    }
    count
}
