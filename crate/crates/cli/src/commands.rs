//! The five subcommands. Each returns a summary the binary prints; all
//! file and pipeline errors are tagged with the stage that raised them.

use std::fs;
use std::path::Path;

use serde_json::json;

use graspmap_core::io::read_scored_csv;
use graspmap_core::{
    assess_terrain, create_gripper_mask, create_terrain_array, extract_graspable,
    fit_regression_plane, generate_scene, interpolate_occlusions, make_frame_transform,
    parse_cloud, parse_cloud_auto, scored_cloud_from_field, voxfile, write_cloud,
    write_scored_cloud, CloudFormat, Engine, GripperMask, ScoreField, TerrainArray,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{timed, Report};

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// What `score` produced, for printing and for tests.
#[derive(Debug)]
pub struct ScoreSummary {
    pub points: usize,
    pub dropped_nonfinite: usize,
    pub terrain_dims: (usize, usize, usize),
    pub mask_dims: (usize, usize, usize),
    pub candidates: usize,
    pub graspable: usize,
    pub engine: Engine,
    pub best: Option<((usize, usize, usize), f32)>,
}

/// Full pipeline: parse → plane fit → interpolate → voxelize → mask →
/// assess → extract → write. One report record per stage.
pub fn cmd_score(cfg: &RunConfig) -> CliResult<(ScoreSummary, Report)> {
    cfg.validate()?;
    let input_path = cfg.require_input()?;
    let mut report = Report::new("score", cfg.output.report.as_deref());

    let (bytes, ms) = timed(|| read_file(input_path));
    let bytes = bytes?;
    report.stage(
        "read_input",
        ms,
        json!({"path": input_path.display().to_string(), "bytes": bytes.len()}),
    )?;

    let (parsed, ms) = timed(|| match cfg.input.format.as_cloud_format() {
        Some(fmt) => parse_cloud(&bytes, fmt),
        None => parse_cloud_auto(&bytes),
    });
    let parsed = parsed.map_err(|e| CliError::stage("parse_input", e))?;
    report.stage(
        "parse_input",
        ms,
        json!({"points": parsed.cloud.len(), "dropped_nonfinite": parsed.dropped_nonfinite}),
    )?;
    drop(bytes);

    let (plane, ms) = timed(|| fit_regression_plane(&parsed.cloud));
    let plane = plane.map_err(|e| CliError::stage("fit_plane", e))?;
    let transform = make_frame_transform(&plane);
    report.stage(
        "fit_plane",
        ms,
        json!({"normal": [plane.normal.x, plane.normal.y, plane.normal.z]}),
    )?;

    let c_m = cfg.voxel.c_mm * 1e-3;
    let (grid, ms) = timed(|| interpolate_occlusions(&parsed.cloud, &transform, c_m));
    let grid = grid.map_err(|e| CliError::stage("interpolate", e))?;
    report.stage(
        "interpolate",
        ms,
        json!({"grid_dims": [grid.dims().0, grid.dims().1], "valid_cells": grid.valid_count()}),
    )?;

    let (terrain, ms) = timed(|| create_terrain_array(&grid, cfg.voxel.c_mm, cfg.voxel.fill));
    let terrain = terrain.map_err(|e| CliError::stage("voxelize", e))?;
    let tdims = terrain.dims();
    report.stage(
        "voxelize",
        ms,
        json!({
            "dims": [tdims.0, tdims.1, tdims.2],
            "solids": terrain.solid_total(),
            "fill": cfg.voxel.fill,
        }),
    )?;

    let (mask, ms) = timed(|| create_gripper_mask(&cfg.gripper, cfg.voxel.c_mm));
    let mask = mask.map_err(|e| CliError::stage("mask", e))?;
    let mdims = mask.dims();
    report.stage(
        "mask",
        ms,
        json!({
            "dims": [mdims.0, mdims.1, mdims.2],
            "pivot": [mask.pivot().0, mask.pivot().1, mask.pivot().2],
            "volume": graspmap_core::mask_volume(&mask),
        }),
    )?;

    let opts = cfg.scan.to_options();
    let (field, ms) = timed(|| assess_terrain(&terrain, &mask, &opts));
    let field = field.map_err(|e| CliError::stage("assess", e))?;
    report.stage(
        "assess",
        ms,
        json!({"candidates": field.candidate_count(), "engine": opts.engine}),
    )?;

    let (set, ms) = timed(|| extract_graspable(&field, cfg.scan.g_hat));
    let set = set.map_err(|e| CliError::stage("extract", e))?;
    report.stage(
        "extract",
        ms,
        json!({"graspable": set.points.len(), "g_hat": cfg.scan.g_hat}),
    )?;

    let (written, ms) = timed(|| write_score_outputs(cfg, &field, &terrain, &set));
    let written = written?;
    report.stage("write_outputs", ms, json!({ "written": written }))?;

    Ok((
        ScoreSummary {
            points: parsed.cloud.len(),
            dropped_nonfinite: parsed.dropped_nonfinite,
            terrain_dims: tdims,
            mask_dims: mdims,
            candidates: field.candidate_count(),
            graspable: set.points.len(),
            engine: opts.engine,
            best: field.argmax(),
        },
        report,
    ))
}

fn write_score_outputs(
    cfg: &RunConfig,
    field: &ScoreField,
    terrain: &TerrainArray,
    set: &graspmap_core::GraspableSet,
) -> CliResult<Vec<String>> {
    let mut written = Vec::new();
    if let Some(path) = &cfg.output.scored {
        let scored = scored_cloud_from_field(field, terrain);
        let bytes = write_scored_cloud(&scored, cfg.output.scored_format, cfg.output.colormap);
        write_file(path, &bytes)?;
        written.push(path.display().to_string());
    }
    if let Some(path) = &cfg.output.graspable {
        write_file(path, &graspable_csv(set))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

fn graspable_csv(set: &graspmap_core::GraspableSet) -> Vec<u8> {
    let mut out = String::from("x,y,z,g\n");
    for p in &set.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.position.x, p.position.y, p.position.z, p.score
        ));
    }
    out.into_bytes()
}

/// Re-thresholds an existing scored CSV into a graspable-set CSV,
/// descending by score, ties in input order.
pub fn cmd_extract(scored_csv: &Path, g_hat: f32, out: &Path) -> CliResult<usize> {
    if !(0.0..=1.0).contains(&g_hat) {
        return Err(CliError::Config(format!(
            "g_hat must be in [0, 1], got {g_hat}"
        )));
    }
    let bytes = read_file(scored_csv)?;
    let cloud = read_scored_csv(&bytes).map_err(|e| CliError::stage("parse_scored", e))?;
    let mut rows: Vec<_> = cloud
        .points
        .iter()
        .zip(&cloud.scores)
        .enumerate()
        .filter(|&(_, (_, &g))| g >= g_hat)
        .map(|(i, (p, &g))| (i, p, g))
        .collect();
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let mut out_text = String::from("x,y,z,g\n");
    for (_, p, g) in &rows {
        out_text.push_str(&format!("{},{},{},{}\n", p.x, p.y, p.z, g));
    }
    write_file(out, out_text.as_bytes())?;
    Ok(rows.len())
}

/// Generates the configured synthetic scene and writes it as a cloud.
pub fn cmd_synth(cfg: &RunConfig, out: &Path, format: CloudFormat) -> CliResult<usize> {
    cfg.validate()?;
    let spec = cfg.require_scene()?;
    let cloud = generate_scene(spec).map_err(|e| CliError::stage("generate_scene", e))?;
    write_file(out, &write_cloud(&cloud, format))?;
    Ok(cloud.len())
}

/// One bench table row; also a CSV line in the written report.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: (usize, usize, usize),
    pub c_mm: f64,
    pub engine: Engine,
    pub candidates: usize,
    pub wall_ms: f64,
    pub checksum: u64,
}

impl BenchRow {
    fn csv_line(&self) -> String {
        format!(
            "{}x{}x{},{},{},{},{:.3},{:#018x}\n",
            self.size.0,
            self.size.1,
            self.size.2,
            self.c_mm,
            engine_name(self.engine),
            self.candidates,
            self.wall_ms,
            self.checksum
        )
    }
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Packed => "packed",
        Engine::Reference => "reference",
    }
}

/// FNV-1a over the little-endian bytes of every score slot (NaN
/// sentinels included), so two engines match iff their fields are
/// bit-identical.
pub fn score_checksum(field: &ScoreField) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &g in field.raw() {
        for b in g.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Times `assess_terrain` for every (voxel size, engine) pair on the
/// configured scene. Engines must agree bit-for-bit at each size; a
/// checksum mismatch aborts the run.
pub fn cmd_bench(
    cfg: &RunConfig,
    sizes_mm: &[f64],
    engines: &[Engine],
    out: &Path,
) -> CliResult<Vec<BenchRow>> {
    cfg.validate()?;
    if sizes_mm.is_empty() || engines.is_empty() {
        return Err(CliError::Config(
            "bench needs at least one voxel size and one engine".into(),
        ));
    }
    let spec = cfg.require_scene()?;
    let cloud = generate_scene(spec).map_err(|e| CliError::stage("generate_scene", e))?;
    let plane = fit_regression_plane(&cloud).map_err(|e| CliError::stage("fit_plane", e))?;
    let transform = make_frame_transform(&plane);

    let mut rows = Vec::new();
    for &c_mm in sizes_mm {
        if !(c_mm > 0.0) || c_mm >= cfg.gripper.palm_diameter {
            return Err(CliError::Config(format!(
                "bench voxel size {c_mm} mm must be positive and smaller than the palm diameter"
            )));
        }
        let grid = interpolate_occlusions(&cloud, &transform, c_mm * 1e-3)
            .map_err(|e| CliError::stage("interpolate", e))?;
        let terrain = create_terrain_array(&grid, c_mm, cfg.voxel.fill)
            .map_err(|e| CliError::stage("voxelize", e))?;
        let mask =
            create_gripper_mask(&cfg.gripper, c_mm).map_err(|e| CliError::stage("mask", e))?;

        let mut seen: Vec<(Engine, u64)> = Vec::new();
        for &engine in engines {
            let opts = graspmap_core::ScanOptions {
                engine,
                ..cfg.scan.to_options()
            };
            let (field, wall_ms) = timed(|| assess_terrain(&terrain, &mask, &opts));
            let field = field.map_err(|e| CliError::stage("assess", e))?;
            let checksum = score_checksum(&field);
            rows.push(BenchRow {
                size: terrain.dims(),
                c_mm,
                engine,
                candidates: field.candidate_count(),
                wall_ms,
                checksum,
            });
            seen.push((engine, checksum));
        }
        if let (Some(&(_, packed)), Some(&(_, reference))) = (
            seen.iter().find(|(e, _)| *e == Engine::Packed),
            seen.iter().find(|(e, _)| *e == Engine::Reference),
        ) {
            if packed != reference {
                return Err(CliError::ChecksumMismatch {
                    c_mm,
                    packed,
                    reference,
                });
            }
        }
    }

    let mut csv = String::from("size,c_mm,engine,candidates,wall_ms,checksum\n");
    for row in &rows {
        csv.push_str(&row.csv_line());
    }
    write_file(out, csv.as_bytes())?;
    Ok(rows)
}

#[derive(Debug)]
pub struct MaskInfo {
    pub dims: (usize, usize, usize),
    pub pivot: (usize, usize, usize),
    pub volume: u64,
    pub c_mm: f64,
}

/// Builds the gripper mask and writes it as a voxel-grid dump.
pub fn cmd_mask_dump(cfg: &RunConfig, out: &Path) -> CliResult<MaskInfo> {
    cfg.validate()?;
    let mask = create_gripper_mask(&cfg.gripper, cfg.voxel.c_mm)
        .map_err(|e| CliError::stage("mask", e))?;
    write_file(out, &voxfile::write_mask(&mask))?;
    Ok(MaskInfo {
        dims: mask.dims(),
        pivot: mask.pivot(),
        volume: graspmap_core::mask_volume(&mask),
        c_mm: cfg.voxel.c_mm,
    })
}

/// Round-trip helper for `mask-dump --check`: proves the dump re-reads
/// to the identical mask.
pub fn verify_mask_dump(path: &Path, mask: &GripperMask) -> CliResult<bool> {
    let bytes = read_file(path)?;
    let back = voxfile::read_mask(&bytes).map_err(|e| CliError::stage("read_dump", e))?;
    Ok(back.dims() == mask.dims()
        && back.pivot() == mask.pivot()
        && back.c_mm() == mask.c_mm()
        && (0..mask.dims().2).all(|z| {
            (0..mask.dims().1).all(|y| {
                (0..mask.dims().0).all(|x| back.get(x, y, z) == mask.get(x, y, z))
            })
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspmap_core::{Feature, SceneSpec};

    fn scene_config() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.scene = Some(SceneSpec {
            extent: (0.12, 0.12),
            tilt_deg: 0.0,
            features: vec![Feature::Hemisphere {
                radius: 0.025,
                center: (0.0, 0.0),
            }],
            density: 150_000.0,
            noise_sigma: 0.0,
            seed: 11,
        });
        cfg.voxel.c_mm = 5.0;
        cfg
    }

    #[test]
    fn synth_then_score_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let cloud_path = dir.path().join("scene.ply");
        let mut cfg = scene_config();
        let n = cmd_synth(&cfg, &cloud_path, CloudFormat::PlyBinaryLe).unwrap();
        assert!(n > 1000);

        cfg.input.path = Some(cloud_path);
        cfg.output.scored = Some(dir.path().join("scored.csv"));
        cfg.output.scored_format = graspmap_core::ScoredFormat::Csv;
        cfg.output.graspable = Some(dir.path().join("graspable.csv"));
        cfg.output.report = Some(dir.path().join("run.jsonl"));
        let (summary, report) = cmd_score(&cfg).unwrap();
        assert_eq!(summary.points, n);
        assert!(summary.candidates > 0);
        assert!(summary.best.is_some());
        let stages: Vec<_> = report
            .records()
            .iter()
            .map(|r| r["stage"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(
            stages,
            [
                "read_input",
                "parse_input",
                "fit_plane",
                "interpolate",
                "voxelize",
                "mask",
                "assess",
                "extract",
                "write_outputs"
            ]
        );
        assert!(dir.path().join("scored.csv").exists());
        assert!(dir.path().join("graspable.csv").exists());
        assert!(dir.path().join("run.jsonl").exists());
    }

    #[test]
    fn extract_rethresholds_scored_csv() {
        let dir = tempfile::tempdir().unwrap();
        let scored = dir.path().join("scored.csv");
        std::fs::write(&scored, "x,y,z,g\n0,0,0,0.9\n1,0,0,0.3\n2,0,0,0.95\n").unwrap();
        let out = dir.path().join("graspable.csv");
        let kept = cmd_extract(&scored, 0.5, &out).unwrap();
        assert_eq!(kept, 2);
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,z,g");
        assert!(lines[1].starts_with("2,"), "descending by score: {text}");
        assert!(lines[2].starts_with("0,"));
    }

    #[test]
    fn bench_engines_agree_and_report_rows() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("bench.csv");
        let cfg = scene_config();
        let rows = cmd_bench(
            &cfg,
            &[10.0, 5.0],
            &[Engine::Packed, Engine::Reference],
            &out,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].checksum, pair[1].checksum);
            assert_eq!(pair[0].candidates, pair[1].candidates);
        }
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("size,c_mm,engine,candidates,wall_ms,checksum\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn mask_dump_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("mask.vxg");
        let cfg = scene_config();
        let info = cmd_mask_dump(&cfg, &out).unwrap();
        assert!(info.volume > 0);
        let mask = create_gripper_mask(&cfg.gripper, cfg.voxel.c_mm).unwrap();
        assert!(verify_mask_dump(&out, &mask).unwrap());
    }

    #[test]
    fn missing_input_is_a_config_error() {
        let cfg = RunConfig::default();
        match cmd_score(&cfg) {
            Err(CliError::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unreadable_input_is_an_io_error() {
        let mut cfg = RunConfig::default();
        cfg.input.path = Some(std::path::PathBuf::from("/nonexistent/q.ply"));
        match cmd_score(&cfg) {
            Err(e @ CliError::Io { .. }) => assert_eq!(e.exit_code(), crate::error::EXIT_IO),
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
