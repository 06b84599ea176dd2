//! Run configuration: a TOML file with one table per pipeline stage.
//! Every key has a default; command-line flags override file values.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use graspmap_core::{
    CandidatePolicy, CloudFormat, Colormap, Engine, FillMode, GripperParams, ScanOptions,
    SceneSpec, ScoredFormat,
};

use crate::error::CliError;

/// Input format, `Auto` sniffs PLY magic and falls back to xyz text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    #[default]
    Auto,
    PlyAscii,
    PlyBinaryLe,
    Xyz,
}

impl InputFormat {
    pub fn as_cloud_format(self) -> Option<CloudFormat> {
        match self {
            InputFormat::Auto => None,
            InputFormat::PlyAscii => Some(CloudFormat::PlyAscii),
            InputFormat::PlyBinaryLe => Some(CloudFormat::PlyBinaryLe),
            InputFormat::Xyz => Some(CloudFormat::Xyz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: InputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Scored-cloud artifact; skipped when `None`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scored: Option<PathBuf>,
    pub scored_format: ScoredFormat,
    /// Graspable-set CSV (descending score); skipped when `None`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graspable: Option<PathBuf>,
    /// JSON-lines run report, appended to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    pub colormap: Colormap,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            scored: None,
            scored_format: ScoredFormat::PlyBinaryLe,
            graspable: None,
            report: None,
            colormap: Colormap::ViridisLike,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoxelConfig {
    /// Voxel edge length, millimeters.
    pub c_mm: f64,
    pub fill: FillMode,
}

impl Default for VoxelConfig {
    fn default() -> Self {
        VoxelConfig {
            c_mm: 2.0,
            fill: FillMode::Shell,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Meters in the regression-plane frame; `None` scans everything.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_threshold: Option<f64>,
    pub policy: CandidatePolicy,
    pub engine: Engine,
    /// Graspability threshold for the extracted set.
    pub g_hat: f32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            z_threshold: None,
            policy: CandidatePolicy::SurfaceVoxels,
            engine: Engine::Packed,
            g_hat: 0.8,
        }
    }
}

impl ScanConfig {
    pub fn to_options(self) -> ScanOptions {
        ScanOptions {
            z_threshold: self.z_threshold,
            policy: self.policy,
            engine: self.engine,
        }
    }
}

fn default_gripper() -> GripperParams {
    GripperParams {
        palm_diameter: 40.0,
        finger_length: 32.0,
        finger_angle_range: (0.0, 45.0),
        spine_clearance: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: InputConfig,
    pub output: OutputConfig,
    pub voxel: VoxelConfig,
    pub gripper: GripperParams,
    pub scan: ScanConfig,
    /// Synthetic scene, used by `synth` and `bench`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: InputConfig::default(),
            output: OutputConfig::default(),
            voxel: VoxelConfig::default(),
            gripper: default_gripper(),
            scan: ScanConfig::default(),
            scene: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Rejects invalid numeric fields before any computation or I/O.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.voxel.c_mm > 0.0) || !self.voxel.c_mm.is_finite() {
            return Err(CliError::Config(format!(
                "voxel.c_mm must be positive, got {}",
                self.voxel.c_mm
            )));
        }
        self.gripper
            .validate()
            .map_err(|e| CliError::Config(format!("gripper: {e}")))?;
        if self.voxel.c_mm >= self.gripper.palm_diameter {
            return Err(CliError::Config(format!(
                "voxel.c_mm = {} must be smaller than gripper.palm_diameter = {}",
                self.voxel.c_mm, self.gripper.palm_diameter
            )));
        }
        if !(0.0..=1.0).contains(&self.scan.g_hat) {
            return Err(CliError::Config(format!(
                "scan.g_hat must be in [0, 1], got {}",
                self.scan.g_hat
            )));
        }
        if let Some(t) = self.scan.z_threshold {
            if !t.is_finite() {
                return Err(CliError::Config(format!(
                    "scan.z_threshold must be finite, got {t}"
                )));
            }
        }
        if let Some(scene) = &self.scene {
            scene
                .validate()
                .map_err(|e| CliError::Config(format!("scene: {e}")))?;
        }
        Ok(())
    }

    pub fn require_input(&self) -> Result<&std::path::Path, CliError> {
        self.input
            .path
            .as_deref()
            .ok_or_else(|| CliError::Config("no input path (set [input] path or --input)".into()))
    }

    pub fn require_scene(&self) -> Result<&SceneSpec, CliError> {
        self.scene
            .as_ref()
            .ok_or_else(|| CliError::Config("no [scene] block in config".into()))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub input_format: Option<InputFormat>,
    pub scored_out: Option<PathBuf>,
    pub scored_format: Option<ScoredFormat>,
    pub graspable_out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub colormap: Option<Colormap>,
    pub c_mm: Option<f64>,
    pub fill: Option<FillMode>,
    pub z_threshold: Option<f64>,
    pub policy: Option<CandidatePolicy>,
    pub engine: Option<Engine>,
    pub g_hat: Option<f32>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.input {
            cfg.input.path = Some(v.clone());
        }
        if let Some(v) = self.input_format {
            cfg.input.format = v;
        }
        if let Some(v) = &self.scored_out {
            cfg.output.scored = Some(v.clone());
        }
        if let Some(v) = self.scored_format {
            cfg.output.scored_format = v;
        }
        if let Some(v) = &self.graspable_out {
            cfg.output.graspable = Some(v.clone());
        }
        if let Some(v) = &self.report {
            cfg.output.report = Some(v.clone());
        }
        if let Some(v) = self.colormap {
            cfg.output.colormap = v;
        }
        if let Some(v) = self.c_mm {
            cfg.voxel.c_mm = v;
        }
        if let Some(v) = self.fill {
            cfg.voxel.fill = v;
        }
        if let Some(v) = self.z_threshold {
            cfg.scan.z_threshold = Some(v);
        }
        if let Some(v) = self.policy {
            cfg.scan.policy = v;
        }
        if let Some(v) = self.engine {
            cfg.scan.engine = v;
        }
        if let Some(v) = self.g_hat {
            cfg.scan.g_hat = v;
        }
        if let Some(v) = self.seed {
            if let Some(scene) = &mut cfg.scene {
                scene.seed = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[input]
path = "scene.ply"
format = "auto"

[output]
scored = "scored.ply"
scored_format = "ply_binary_le"
graspable = "graspable.csv"
report = "run.jsonl"
colormap = "viridis_like"

[voxel]
c_mm = 2.0
fill = "shell"

[gripper]
palm_diameter = 40.0
finger_length = 32.0
finger_angle_range = [0.0, 45.0]
spine_clearance = 0.0

[scan]
policy = "surface_voxels"
engine = "packed"
g_hat = 0.8

[scene]
extent = [0.302, 0.302]
tilt_deg = 0.0
density = 250000.0
noise_sigma = 0.0
seed = 17

[[scene.features]]
type = "hemisphere"
radius = 0.03
center = [0.0, 0.0]
"#;

    #[test]
    fn sample_config_parses_and_validates() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.voxel.c_mm, 2.0);
        assert_eq!(cfg.scan.engine, Engine::Packed);
        assert_eq!(cfg.scene.as_ref().unwrap().features.len(), 1);
    }

    #[test]
    fn roundtrip_is_idempotent() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let once = cfg.to_toml();
        let reparsed = RunConfig::from_toml(&once).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(once, reparsed.to_toml());
    }

    #[test]
    fn defaults_cover_an_empty_config() {
        let cfg = RunConfig::from_toml("").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.voxel.c_mm, 2.0);
        assert_eq!(cfg.scan.g_hat, 0.8);
        assert_eq!(cfg.scan.policy, CandidatePolicy::SurfaceVoxels);
        assert!(cfg.input.path.is_none());
    }

    #[test]
    fn invalid_values_rejected_before_io() {
        let cfg = RunConfig::from_toml("[voxel]\nc_mm = 0.0\n").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let cfg = RunConfig::from_toml("[scan]\ng_hat = 1.5\n").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let cfg = RunConfig::from_toml(
            "[gripper]\npalm_diameter = -3.0\nfinger_length = 30.0\n\
             finger_angle_range = [0.0, 30.0]\nspine_clearance = 0.0\n",
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[voxel]\nc_m = 2.0\n").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let ov = Overrides {
            c_mm: Some(4.0),
            engine: Some(Engine::Reference),
            g_hat: Some(0.5),
            seed: Some(99),
            ..Default::default()
        };
        ov.apply(&mut cfg);
        assert_eq!(cfg.voxel.c_mm, 4.0);
        assert_eq!(cfg.scan.engine, Engine::Reference);
        assert_eq!(cfg.scan.g_hat, 0.5);
        assert_eq!(cfg.scene.as_ref().unwrap().seed, 99);
    }
}
