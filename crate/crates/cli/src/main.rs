use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graspmap_cli::{
    cmd_bench, cmd_extract, cmd_mask_dump, cmd_score, cmd_synth, engine_name, CliError, CliResult,
    InputFormat, Overrides, RunConfig,
};
use graspmap_core::{CandidatePolicy, CloudFormat, Colormap, Engine, FillMode, ScoredFormat};

#[derive(Parser)]
#[command(
    name = "graspmap",
    version,
    about = "Graspable-convexity detection on rough-terrain point clouds"
)]
struct Cli {
    /// Cap the worker-thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: cloud in, scored map and graspable set out.
    Score(ScoreArgs),
    /// Re-threshold an existing scored CSV into a graspable-set CSV.
    Extract(ExtractArgs),
    /// Generate a synthetic scene cloud from the config's [scene] block.
    Synth(SynthArgs),
    /// Time both scoring engines across voxel sizes; write a CSV table.
    Bench(BenchArgs),
    /// Write the gripper mask as a binary voxel grid.
    MaskDump(MaskDumpArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration; flags below override file values.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> CliResult<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Input cloud (PLY or xyz).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_input_format)]
    input_format: Option<InputFormat>,
    /// Scored-cloud output path.
    #[arg(long)]
    scored_out: Option<PathBuf>,
    #[arg(long, value_parser = parse_scored_format)]
    scored_format: Option<ScoredFormat>,
    /// Graspable-set CSV output path.
    #[arg(long)]
    graspable_out: Option<PathBuf>,
    /// JSONL run-report path (appended).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_parser = parse_colormap)]
    colormap: Option<Colormap>,
    /// Voxel edge length in millimeters.
    #[arg(long)]
    c_mm: Option<f64>,
    #[arg(long, value_parser = parse_fill)]
    fill: Option<FillMode>,
    /// Minimum voxel-center height (meters, plane frame) to scan.
    #[arg(long, allow_hyphen_values = true)]
    z_threshold: Option<f64>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<CandidatePolicy>,
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Graspability threshold in [0, 1].
    #[arg(long)]
    g_hat: Option<f32>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Scored CSV produced by `score`.
    #[arg(long)]
    scored: PathBuf,
    /// Graspability threshold in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    g_hat: f32,
    /// Output graspable-set CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output cloud path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_cloud_format, default_value = "ply_binary_le")]
    cloud_format: CloudFormat,
    /// Override the scene seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output CSV path.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    /// Voxel sizes to sweep, millimeters.
    #[arg(long, value_delimiter = ',', default_values_t = [8.0, 4.0, 2.0])]
    sizes: Vec<f64>,
    /// Engines to time.
    #[arg(long, value_delimiter = ',', value_parser = parse_engine,
          default_values = ["packed", "reference"])]
    engines: Vec<Engine>,
}

#[derive(Args)]
struct MaskDumpArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output voxel-grid path.
    #[arg(long)]
    out: PathBuf,
    /// Voxel edge length in millimeters.
    #[arg(long)]
    c_mm: Option<f64>,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "packed" => Ok(Engine::Packed),
        "reference" => Ok(Engine::Reference),
        _ => Err(format!("unknown engine '{s}' (packed|reference)")),
    }
}

fn parse_policy(s: &str) -> Result<CandidatePolicy, String> {
    match s {
        "surface_voxels" => Ok(CandidatePolicy::SurfaceVoxels),
        "all_solid_voxels" => Ok(CandidatePolicy::AllSolidVoxels),
        _ => Err(format!(
            "unknown policy '{s}' (surface_voxels|all_solid_voxels)"
        )),
    }
}

fn parse_fill(s: &str) -> Result<FillMode, String> {
    match s {
        "shell" => Ok(FillMode::Shell),
        "filled" => Ok(FillMode::Filled),
        _ => Err(format!("unknown fill mode '{s}' (shell|filled)")),
    }
}

fn parse_colormap(s: &str) -> Result<Colormap, String> {
    match s {
        "viridis_like" => Ok(Colormap::ViridisLike),
        "grayscale" => Ok(Colormap::Grayscale),
        _ => Err(format!("unknown colormap '{s}' (viridis_like|grayscale)")),
    }
}

fn parse_cloud_format(s: &str) -> Result<CloudFormat, String> {
    match s {
        "ply_ascii" => Ok(CloudFormat::PlyAscii),
        "ply_binary_le" => Ok(CloudFormat::PlyBinaryLe),
        "xyz" => Ok(CloudFormat::Xyz),
        _ => Err(format!(
            "unknown cloud format '{s}' (ply_ascii|ply_binary_le|xyz)"
        )),
    }
}

fn parse_scored_format(s: &str) -> Result<ScoredFormat, String> {
    match s {
        "ply_ascii" => Ok(ScoredFormat::PlyAscii),
        "ply_binary_le" => Ok(ScoredFormat::PlyBinaryLe),
        "csv" => Ok(ScoredFormat::Csv),
        _ => Err(format!(
            "unknown scored format '{s}' (ply_ascii|ply_binary_le|csv)"
        )),
    }
}

fn parse_input_format(s: &str) -> Result<InputFormat, String> {
    match s {
        "auto" => Ok(InputFormat::Auto),
        "ply_ascii" => Ok(InputFormat::PlyAscii),
        "ply_binary_le" => Ok(InputFormat::PlyBinaryLe),
        "xyz" => Ok(InputFormat::Xyz),
        _ => Err(format!(
            "unknown input format '{s}' (auto|ply_ascii|ply_binary_le|xyz)"
        )),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // Ignore the error when a pool already exists (tests, repeat calls).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Score(args) => {
            let mut cfg = args.config.load()?;
            let overrides = Overrides {
                input: args.input,
                input_format: args.input_format,
                scored_out: args.scored_out,
                scored_format: args.scored_format,
                graspable_out: args.graspable_out,
                report: args.report,
                colormap: args.colormap,
                c_mm: args.c_mm,
                fill: args.fill,
                z_threshold: args.z_threshold,
                policy: args.policy,
                engine: args.engine,
                g_hat: args.g_hat,
                seed: None,
            };
            overrides.apply(&mut cfg);
            let (summary, _report) = cmd_score(&cfg)?;
            println!(
                "scored {} candidates over a {}x{}x{} terrain ({} input points, engine {})",
                summary.candidates,
                summary.terrain_dims.0,
                summary.terrain_dims.1,
                summary.terrain_dims.2,
                summary.points,
                engine_name(summary.engine),
            );
            match summary.best {
                Some(((x, y, z), g)) => {
                    println!("best score {g:.4} at voxel ({x}, {y}, {z}); {} graspable point(s) at or above threshold", summary.graspable)
                }
                None => println!("no candidates scored"),
            }
            Ok(())
        }
        Command::Extract(args) => {
            let kept = cmd_extract(&args.scored, args.g_hat, &args.out)?;
            println!(
                "kept {kept} point(s) with g >= {} -> {}",
                args.g_hat,
                args.out.display()
            );
            Ok(())
        }
        Command::Synth(args) => {
            let mut cfg = args.config.load()?;
            if let Some(seed) = args.seed {
                if let Some(scene) = &mut cfg.scene {
                    scene.seed = seed;
                }
            }
            let n = cmd_synth(&cfg, &args.out, args.cloud_format)?;
            println!("wrote {n} points -> {}", args.out.display());
            Ok(())
        }
        Command::Bench(args) => {
            let cfg = args.config.load()?;
            let rows = cmd_bench(&cfg, &args.sizes, &args.engines, &args.out)?;
            for row in &rows {
                println!(
                    "c = {} mm, {}: {} candidates in {:.3} ms (checksum {:#018x})",
                    row.c_mm,
                    engine_name(row.engine),
                    row.candidates,
                    row.wall_ms,
                    row.checksum
                );
            }
            println!("wrote {} row(s) -> {}", rows.len(), args.out.display());
            Ok(())
        }
        Command::MaskDump(args) => {
            let mut cfg = args.config.load()?;
            if let Some(c) = args.c_mm {
                cfg.voxel.c_mm = c;
            }
            let info = cmd_mask_dump(&cfg, &args.out)?;
            println!(
                "mask {}x{}x{} at c = {} mm, pivot ({}, {}, {}), {} solid voxel(s) -> {}",
                info.dims.0,
                info.dims.1,
                info.dims.2,
                info.c_mm,
                info.pivot.0,
                info.pivot.1,
                info.pivot.2,
                info.volume,
                args.out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
