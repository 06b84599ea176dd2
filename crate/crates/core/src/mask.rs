//! Gripper mask: the graspable volume of a spine gripper, voxelized.
//!
//! The volume is a circular truncated cone hanging below the palm: the
//! top opening has radius `palm_diameter / 2` and the wall expands
//! downward at the maximum finger angle. Its depth is the vertical reach
//! of a finger at the minimum angle plus the spine clearance. The pivot
//! voxel sits at the top center; scoring aligns it with each candidate
//! terrain voxel.
//!
//! Discretization anchors the pivot voxel's center on the cone's top
//! plane and tests every voxel center against the cone inequality, so
//! the mask is exactly symmetric under 90° rotations about its axis.

use serde::{Deserialize, Serialize};

use crate::bitgrid::{BitGrid3, Dims};
use crate::{Error, Result};

/// Gripper geometry Γ. Angles are measured from the gripper axis in
/// degrees; lengths are millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperParams {
    pub palm_diameter: f64,
    pub finger_length: f64,
    /// (min, max) finger joint angle. Equal angles give a cylinder.
    pub finger_angle_range: (f64, f64),
    /// Extra depth below the fingertip sweep for spine engagement.
    #[serde(default)]
    pub spine_clearance: f64,
}

impl GripperParams {
    pub fn validate(&self) -> Result<()> {
        let (min, max) = self.finger_angle_range;
        if !(self.palm_diameter > 0.0) || !self.palm_diameter.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "palm diameter must be positive, got {}",
                self.palm_diameter
            )));
        }
        if !(self.finger_length > 0.0) || !self.finger_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "finger length must be positive, got {}",
                self.finger_length
            )));
        }
        if !(0.0 <= min && min <= max && max <= 90.0) {
            return Err(Error::InvalidParameter(format!(
                "finger angle range must satisfy 0 ≤ min ≤ max ≤ 90, got ({min}, {max})"
            )));
        }
        if !(self.spine_clearance >= 0.0) || !self.spine_clearance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spine clearance must be non-negative, got {}",
                self.spine_clearance
            )));
        }
        Ok(())
    }

    /// Cone top radius, mm.
    pub fn top_radius(&self) -> f64 {
        self.palm_diameter / 2.0
    }

    /// Cone depth below the pivot plane, mm.
    pub fn depth(&self) -> f64 {
        self.finger_length * self.finger_angle_range.0.to_radians().cos() + self.spine_clearance
    }

    /// Cone radius at a given depth below the pivot plane, mm.
    pub fn radius_at_depth(&self, depth: f64) -> f64 {
        self.top_radius() + self.finger_angle_range.1.to_radians().tan() * depth
    }
}

/// Bit-packed boolean mask M with its pivot voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct GripperMask {
    occupancy: BitGrid3,
    c_mm: f64,
    pivot: (usize, usize, usize),
}

impl GripperMask {
    /// Wraps raw occupancy (the dump-file loader). Lateral dims must be
    /// odd; the pivot is derived as the top-center voxel.
    pub fn from_occupancy(occupancy: BitGrid3, c_mm: f64) -> Result<Self> {
        let (nx, ny, nz) = occupancy.dims();
        if nx % 2 == 0 || ny % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask lateral dims must be odd to center the pivot, got {nx}×{ny}"
            )));
        }
        if !(c_mm > 0.0) || !c_mm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "voxel size must be positive, got {c_mm} mm"
            )));
        }
        if occupancy.count_ones() == 0 {
            return Err(Error::InvalidParameter("mask has no solid voxels".into()));
        }
        let pivot = (nx / 2, ny / 2, nz - 1);
        Ok(GripperMask {
            occupancy,
            c_mm,
            pivot,
        })
    }

    pub fn dims(&self) -> Dims {
        self.occupancy.dims()
    }

    pub fn c_mm(&self) -> f64 {
        self.c_mm
    }

    /// Top-center voxel index; scoring aligns this with the candidate.
    pub fn pivot(&self) -> (usize, usize, usize) {
        self.pivot
    }

    pub fn occupancy(&self) -> &BitGrid3 {
        &self.occupancy
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy.get(x, y, z)
    }
}

/// Builds the mask for geometry Γ at voxel size `c_mm`.
///
/// A voxel is solid iff its center lies inside the truncated cone
/// (boundary inclusive). The z axis points up: layer `k-1` is the pivot
/// layer at depth 0 and layer 0 is the deepest. Lateral dims are odd by
/// construction so the cone axis passes through voxel centers.
pub fn create_gripper_mask(params: &GripperParams, c_mm: f64) -> Result<GripperMask> {
    params.validate()?;
    if !(c_mm > 0.0) || !c_mm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "voxel size must be positive, got {c_mm} mm"
        )));
    }
    if c_mm >= params.palm_diameter {
        return Err(Error::InvalidParameter(format!(
            "voxel size {c_mm} mm must be smaller than the palm diameter {} mm",
            params.palm_diameter
        )));
    }

    let depth = params.depth();
    // Layers whose center depth (measured from the pivot plane) is ≤ depth.
    let nz_f = (depth / c_mm).floor() + 1.0;
    let max_center_depth = (nz_f - 1.0) * c_mm;
    let half_f = (params.radius_at_depth(max_center_depth) / c_mm).floor();
    // A 90° max angle makes the radius unbounded; anything past a few
    // thousand voxels per side is a parameter mistake, not a mask.
    if !nz_f.is_finite() || !half_f.is_finite() || nz_f > 4096.0 || half_f > 4096.0 {
        return Err(Error::InvalidParameter(format!(
            "mask dims explode for Γ = {params:?} at c = {c_mm} mm"
        )));
    }
    let nz = nz_f as usize;
    let half = half_f as usize;
    let n_lat = 2 * half + 1;

    let mut occupancy = BitGrid3::new((n_lat, n_lat, nz));
    for iz in 0..nz {
        let d = (nz - 1 - iz) as f64 * c_mm;
        let r = params.radius_at_depth(d);
        let r2 = r * r;
        for iy in 0..n_lat {
            let dy = (iy as f64 - half as f64) * c_mm;
            for ix in 0..n_lat {
                let dx = (ix as f64 - half as f64) * c_mm;
                if dx * dx + dy * dy <= r2 {
                    occupancy.set(ix, iy, iz, true);
                }
            }
        }
    }
    GripperMask::from_occupancy(occupancy, c_mm)
}

/// Number of solid voxels in the mask.
pub fn mask_volume(mask: &GripperMask) -> u64 {
    mask.occupancy.count_ones()
}
