//! Shared fixtures for the criterion benchmarks: one hemisphere-on-plane
//! demo scene, one gripper, and a helper that runs the pipeline up to
//! the point the benchmarks start measuring.

use graspmap_core::{
    create_gripper_mask, create_terrain_array, fit_regression_plane, generate_scene,
    interpolate_occlusions, make_frame_transform, Feature, FillMode, GripperMask, GripperParams,
    PointCloud, SceneSpec, TerrainArray,
};

/// 0.302 m square flat plate with a 30 mm hemispherical bump.
pub fn demo_scene(density: f64) -> SceneSpec {
    SceneSpec {
        extent: (0.302, 0.302),
        tilt_deg: 0.0,
        features: vec![Feature::Hemisphere {
            radius: 0.03,
            center: (0.0, 0.0),
        }],
        density,
        noise_sigma: 0.0,
        seed: 17,
    }
}

/// 28 mm palm, 24 mm fingers, 0–45° spread.
pub fn demo_gripper() -> GripperParams {
    GripperParams {
        palm_diameter: 28.0,
        finger_length: 24.0,
        finger_angle_range: (0.0, 45.0),
        spine_clearance: 0.0,
    }
}

/// Everything the scoring benchmarks need, built once per voxel size.
pub struct Prepared {
    pub cloud: PointCloud,
    pub terrain: TerrainArray,
    pub mask: GripperMask,
}

/// Runs generate → fit → interpolate → voxelize → mask at `c_mm`.
pub fn prepare(density: f64, c_mm: f64) -> Prepared {
    let cloud = generate_scene(&demo_scene(density)).expect("valid scene");
    let plane = fit_regression_plane(&cloud).expect("plane fits");
    let transform = make_frame_transform(&plane);
    let grid =
        interpolate_occlusions(&cloud, &transform, c_mm * 1e-3).expect("grid interpolates");
    let terrain = create_terrain_array(&grid, c_mm, FillMode::Shell).expect("terrain voxelizes");
    let mask = create_gripper_mask(&demo_gripper(), c_mm).expect("mask builds");
    Prepared {
        cloud,
        terrain,
        mask,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspmap_core::{assess_terrain, ScanOptions};

    #[test]
    fn fixture_produces_candidates_at_every_size() {
        for c_mm in [8.0, 4.0] {
            let p = prepare(60_000.0, c_mm);
            let field = assess_terrain(&p.terrain, &p.mask, &ScanOptions::default()).unwrap();
            assert!(field.candidate_count() > 50, "c = {c_mm} mm");
        }
    }

    #[test]
    fn fixture_terrain_matches_mask_resolution() {
        let p = prepare(60_000.0, 5.0);
        assert_eq!(p.terrain.c_mm(), p.mask.c_mm());
        assert!(p.cloud.len() > 1000);
    }
}
