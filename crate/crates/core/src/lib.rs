//! Detection of geometrically graspable convexities on rough-terrain
//! point clouds.
//!
//! The pipeline turns a raw LiDAR/depth cloud into a per-point
//! graspability map for a spine-gripper climbing robot:
//!
//! 1. [`io`] — parse PLY / xyz clouds, write scored maps.
//! 2. [`preprocess`] — fit the terrain's regression plane, rotate into its
//!    frame, and fill occlusions by Delaunay interpolation onto a grid.
//! 3. [`terrain`] — voxelize the height grid into a bit-packed boolean
//!    terrain array.
//! 4. [`mask`] — build the gripper's graspable volume as a truncated-cone
//!    voxel mask with a pivot at the top center.
//! 5. [`scoring`] — slide the mask over the terrain and score every
//!    candidate voxel by the fraction of nearby terrain that falls inside
//!    the mask; threshold into a graspable-point set.
//!
//! [`synth`] generates deterministic synthetic scenes with analytic
//! ground truth for tests and benchmarks.

pub mod bitgrid;
pub mod cloud;
mod error;
pub mod io;
pub mod mask;
pub mod preprocess;
pub mod scoring;
pub mod synth;
pub mod terrain;
pub mod voxfile;

pub use bitgrid::{BitGrid3, Dims};
pub use cloud::{PointCloud, ScoredCloud};
pub use error::{Error, Result};
pub use io::{
    parse_cloud, parse_cloud_auto, write_cloud, write_scored_cloud, CloudFormat, Colormap,
    ScoredFormat,
};
pub use mask::{create_gripper_mask, mask_volume, GripperMask, GripperParams};
pub use preprocess::{
    fit_regression_plane, interpolate_occlusions, make_frame_transform, FrameTransform,
    HeightGrid, RegressionPlane,
};
pub use scoring::{
    assess_terrain, extract_graspable, score_voxel, scored_cloud_from_field, CandidatePolicy,
    Engine, GraspPoint, GraspableSet, ScanOptions, ScoreField,
};
pub use synth::{analytic_height, generate_scene, Feature, SceneSpec, TrenchAxis};
pub use terrain::{create_terrain_array, extract_window, solid_count, FillMode, TerrainArray, VoxelWindow};
