//! Thin command-line binding over the library: argument parsing, config
//! merging, and printing. All computation lives in `geodepth::cli` and the
//! modules behind it.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use geodepth::cli::{
    self, default_caps, resolve, resolve_opt, CurveMode, RaycastSection, RunConfig, ScaleMode,
    DEFAULT_BIN_WIDTH_M, DEFAULT_DEPTH_CAP_M, DEFAULT_MAX_DIST_M,
};
use geodepth::eval::EvalSelection;
use geodepth::raster::Geocalibration;
use geodepth::register::SearchGrid;
use geodepth::testkit::{SceneKind, SceneSpec};
use geodepth::voxel::{DEFAULT_CELL_Z_M, DEFAULT_EYE_HEIGHT_M};
use geodepth::{GeodepthError, Result};

const AFTER_HELP: &str = "defaults:\n  \
    eye height 2.5 m, vertical voxel 1 m, ray step = gsd/2, \
    max range = half the grid diagonal\n  \
    panorama 1024x512, field of view 90, depth cap 80 m\n  \
    loss: delta 2, alpha_h 0.1\n\
    exit codes: 0 ok, 2 usage/config, 3 data/format/io, 4 contract";

#[derive(Parser)]
#[command(
    name = "geodepth",
    version,
    about = "Synthetic ground-level depth from overhead height rasters",
    after_help = AFTER_HELP
)]
struct Cli {
    /// JSON config file; command-line flags override config values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a procedural height-map scene (PFM + geo sidecar).
    Scene(SceneArgs),
    /// Render a depth panorama from a height raster.
    Synth(SynthArgs),
    /// Extract a perspective depth cutout from a panorama.
    Cutout(CutoutArgs),
    /// Evaluate a depth prediction against ground truth (JSON metrics).
    Metrics(MetricsArgs),
    /// Metrics with median scaling enabled (defaults to median-gt).
    Calibrate(MetricsArgs),
    /// Emit evaluation curves or per-image median scatter rows as CSV.
    Curves(CurvesArgs),
    /// Recover camera orientation by grid search against a panorama.
    Register(RegisterArgs),
    /// Seeded heading-noise draws (CSV, with a mean |delta| summary row).
    Noise(NoiseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneKindArg {
    Flat,
    Wall,
    BoxField,
    Ramp,
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long, value_enum)]
    kind: SceneKindArg,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    /// Ground sample distance, meters per pixel.
    #[arg(long, default_value_t = 1.0)]
    gsd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall distance from the camera, meters.
    #[arg(long, default_value_t = 20.0)]
    wall_distance: f64,
    #[arg(long, default_value_t = 10.0)]
    wall_height: f64,
    #[arg(long, default_value_t = 1.0)]
    wall_thickness: f64,
    #[arg(long, default_value_t = 12)]
    box_count: usize,
    #[arg(long, default_value_t = 4.0)]
    box_min_size: f64,
    #[arg(long, default_value_t = 20.0)]
    box_max_size: f64,
    #[arg(long, default_value_t = 4.0)]
    box_min_height: f64,
    #[arg(long, default_value_t = 25.0)]
    box_max_height: f64,
    /// Ramp rise per meter northward.
    #[arg(long, default_value_t = 0.5)]
    ramp_slope: f64,
    /// Eye height recorded in the sidecar, meters.
    #[arg(long, allow_negative_numbers = true)]
    eye_height: Option<f64>,
    /// Vertical voxel size recorded in the sidecar, meters.
    #[arg(long)]
    cell_z: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Height raster (PFM with .geo.json sidecar).
    #[arg(long)]
    heights: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ray sampling interval, meters (default gsd/2).
    #[arg(long)]
    step: Option<f64>,
    /// Maximum ray range, meters (default half the grid diagonal).
    #[arg(long)]
    max_range: Option<f64>,
    #[arg(long)]
    pano_width: Option<usize>,
    #[arg(long)]
    pano_height: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    eye_height: Option<f64>,
    /// Vertical voxel size, meters.
    #[arg(long)]
    cell_z: Option<f64>,
}

#[derive(Args)]
struct CutoutArgs {
    #[arg(long)]
    pano: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    yaw: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pitch: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    roll: Option<f64>,
    #[arg(long)]
    fov: Option<f64>,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleModeArg {
    None,
    MedianGt,
    MedianRef,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Ground-truth depth cap, meters.
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    min_depth: Option<f64>,
    #[arg(long, value_enum)]
    scale_mode: Option<ScaleModeArg>,
    /// Reference raster for --scale-mode median-ref.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveModeArg {
    Distance,
    Cap,
    Scatter,
}

#[derive(Args)]
struct CurvesArgs {
    /// Prediction raster(s); repeat together with --gt for scatter mode.
    #[arg(long)]
    pred: Vec<PathBuf>,
    #[arg(long)]
    gt: Vec<PathBuf>,
    #[arg(long, value_enum)]
    mode: CurveModeArg,
    /// Distance-bin width, meters (distance mode).
    #[arg(long)]
    bin_width: Option<f64>,
    /// Distance axis limit, meters (distance mode).
    #[arg(long)]
    max_dist: Option<f64>,
    /// Comma-separated cap list, meters (cap mode).
    #[arg(long, value_delimiter = ',')]
    caps: Option<Vec<f64>>,
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    min_depth: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegisterArgs {
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long)]
    pano: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    yaw_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    yaw_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    yaw_step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pitch_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pitch_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pitch_step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    roll: Option<f64>,
    #[arg(long)]
    fov: Option<f64>,
    /// Minimum mutually-valid fraction of query pixels per grid cell.
    #[arg(long)]
    min_overlap: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Also write the JSON result here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, allow_negative_numbers = true)]
    yaw: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pitch: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    roll: Option<f64>,
    #[arg(long)]
    fov: Option<f64>,
    /// Maximum heading error, degrees.
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of draws.
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn required_path(
    flag: Option<PathBuf>,
    config: Option<PathBuf>,
    name: &str,
) -> Result<PathBuf> {
    flag.or(config)
        .ok_or_else(|| GeodepthError::Config(format!("missing required path: {name}")))
}

fn calib_from(args_yaw: Option<f64>, pitch: Option<f64>, roll: Option<f64>, fov: Option<f64>, cfg: &RunConfig) -> Result<Geocalibration> {
    Geocalibration::new(
        resolve(args_yaw, cfg.calib.yaw_deg, 0.0),
        resolve(pitch, cfg.calib.pitch_deg, 0.0),
        resolve(roll, cfg.calib.roll_deg, 0.0),
        resolve(fov, cfg.calib.fov_deg, 90.0),
        resolve(None, cfg.calib.eye_height_m, DEFAULT_EYE_HEIGHT_M),
    )
}

fn selection_from(cap: Option<f64>, min_depth: Option<f64>, cfg: &RunConfig) -> Result<EvalSelection> {
    EvalSelection::new(resolve(cap, cfg.eval.depth_cap_m, DEFAULT_DEPTH_CAP_M))?
        .with_min_depth(resolve(min_depth, cfg.eval.min_depth_m, 0.0))
}

fn run_metrics(args: MetricsArgs, cfg: &RunConfig, is_calibrate: bool) -> Result<()> {
    let pred = required_path(args.pred, cfg.paths.pred.clone(), "--pred")?;
    let gt = required_path(args.gt, cfg.paths.gt.clone(), "--gt")?;
    let sel = selection_from(args.cap, args.min_depth, cfg)?;
    let default_mode = if is_calibrate { ScaleModeArg::MedianGt } else { ScaleModeArg::None };
    let mode = match args.scale_mode.unwrap_or(default_mode) {
        ScaleModeArg::None => ScaleMode::None,
        ScaleModeArg::MedianGt => ScaleMode::MedianGt,
        ScaleModeArg::MedianRef => ScaleMode::MedianRef(required_path(
            args.reference,
            cfg.paths.reference.clone(),
            "--ref",
        )?),
    };
    let report = cli::cmd_metrics(&pred, &gt, &sel, &mode)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| GeodepthError::Data(format!("report serialization failed: {e}")))?;
    println!("{json}");
    if let Some(out) = args.out {
        std::fs::write(&out, json).map_err(|e| GeodepthError::Io { path: out, source: e })?;
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => cli::load_config(path)?,
        None => RunConfig::default(),
    };

    match cli.command {
        Command::Scene(args) => {
            let kind = match args.kind {
                SceneKindArg::Flat => SceneKind::Flat,
                SceneKindArg::Wall => SceneKind::Wall {
                    distance_m: args.wall_distance,
                    height_m: args.wall_height,
                    thickness_m: args.wall_thickness,
                },
                SceneKindArg::BoxField => SceneKind::BoxField {
                    count: args.box_count,
                    size_range_m: (args.box_min_size, args.box_max_size),
                    height_range_m: (args.box_min_height, args.box_max_height),
                },
                SceneKindArg::Ramp => SceneKind::Ramp { slope: args.ramp_slope },
            };
            let spec = SceneSpec {
                width: args.width,
                height: args.height,
                gsd: args.gsd,
                seed: args.seed,
                kind,
            };
            let eye = resolve(args.eye_height, cfg.raycast.eye_height_m, DEFAULT_EYE_HEIGHT_M);
            let cell_z = resolve(args.cell_z, cfg.raycast.cell_z_m, DEFAULT_CELL_Z_M);
            let summary = cli::cmd_scene(&spec, eye, cell_z, &args.out)?;
            println!("{summary}");
        }
        Command::Synth(args) => {
            let heights = required_path(args.heights, cfg.paths.heights.clone(), "--heights")?;
            let out = required_path(args.out, cfg.paths.out.clone(), "--out")?;
            let overrides = RaycastSection {
                step_m: resolve_opt(args.step, cfg.raycast.step_m),
                max_range_m: resolve_opt(args.max_range, cfg.raycast.max_range_m),
                pano_width: resolve_opt(args.pano_width, cfg.raycast.pano_width),
                pano_height: resolve_opt(args.pano_height, cfg.raycast.pano_height),
                eye_height_m: resolve_opt(args.eye_height, cfg.raycast.eye_height_m),
                cell_z_m: resolve_opt(args.cell_z, cfg.raycast.cell_z_m),
            };
            let summary = cli::cmd_synth(&heights, &out, &overrides)?;
            println!("{summary}");
        }
        Command::Cutout(args) => {
            let pano = required_path(args.pano, cfg.paths.pano.clone(), "--pano")?;
            let out = required_path(args.out, cfg.paths.out.clone(), "--out")?;
            let calib = calib_from(args.yaw, args.pitch, args.roll, args.fov, &cfg)?;
            cli::cmd_cutout(&pano, &out, &calib, args.width, args.height)?;
            println!(
                "cutout: {}x{} yaw={} pitch={} roll={} fov={} -> {}",
                args.width,
                args.height,
                calib.yaw_deg,
                calib.pitch_deg,
                calib.roll_deg,
                calib.fov_deg,
                out.display()
            );
        }
        Command::Metrics(args) => run_metrics(args, &cfg, false)?,
        Command::Calibrate(args) => run_metrics(args, &cfg, true)?,
        Command::Curves(args) => {
            let preds = if args.pred.is_empty() {
                cfg.paths.pred.clone().into_iter().collect()
            } else {
                args.pred
            };
            let gts = if args.gt.is_empty() {
                cfg.paths.gt.clone().into_iter().collect()
            } else {
                args.gt
            };
            if preds.is_empty() || preds.len() != gts.len() {
                return Err(GeodepthError::Config(
                    "curves needs matching --pred and --gt paths".into(),
                ));
            }
            let pairs: Vec<(PathBuf, PathBuf)> = preds.into_iter().zip(gts).collect();
            let out = required_path(args.out, cfg.paths.out.clone(), "--out")?;
            let sel = selection_from(args.cap, args.min_depth, &cfg)?;
            let mode = match args.mode {
                CurveModeArg::Distance => CurveMode::Distance {
                    bin_width_m: args.bin_width.unwrap_or(DEFAULT_BIN_WIDTH_M),
                    max_dist_m: args.max_dist.unwrap_or(DEFAULT_MAX_DIST_M),
                },
                CurveModeArg::Cap => CurveMode::Cap { caps: args.caps.unwrap_or_else(default_caps) },
                CurveModeArg::Scatter => CurveMode::Scatter,
            };
            cli::cmd_curves(&pairs, &sel, &mode, &out)?;
            println!("curves: wrote {}", out.display());
        }
        Command::Register(args) => {
            let query = required_path(args.query, cfg.paths.query.clone(), "--query")?;
            let pano = required_path(args.pano, cfg.paths.pano.clone(), "--pano")?;
            let defaults = SearchGrid::default();
            let grid = SearchGrid {
                yaw_min_deg: resolve(args.yaw_min, cfg.search.yaw_min_deg, defaults.yaw_min_deg),
                yaw_max_deg: resolve(args.yaw_max, cfg.search.yaw_max_deg, defaults.yaw_max_deg),
                yaw_step_deg: resolve(args.yaw_step, cfg.search.yaw_step_deg, defaults.yaw_step_deg),
                pitch_min_deg: resolve(args.pitch_min, cfg.search.pitch_min_deg, defaults.pitch_min_deg),
                pitch_max_deg: resolve(args.pitch_max, cfg.search.pitch_max_deg, defaults.pitch_max_deg),
                pitch_step_deg: resolve(args.pitch_step, cfg.search.pitch_step_deg, defaults.pitch_step_deg),
                roll_deg: resolve(args.roll, cfg.search.roll_deg, defaults.roll_deg),
                fov_deg: resolve(args.fov, cfg.search.fov_deg, defaults.fov_deg),
                min_overlap_frac: resolve(
                    args.min_overlap,
                    cfg.search.min_overlap_frac,
                    defaults.min_overlap_frac,
                ),
                top_k: resolve(args.top_k, cfg.search.top_k, defaults.top_k),
            };
            let result = cli::cmd_register(&query, &pano, &grid)?;
            let json = serde_json::to_string_pretty(&result)
                .map_err(|e| GeodepthError::Data(format!("result serialization failed: {e}")))?;
            println!("{json}");
            if let Some(out) = args.out {
                std::fs::write(&out, json).map_err(|e| GeodepthError::Io { path: out, source: e })?;
            }
        }
        Command::Noise(args) => {
            let calib = calib_from(args.yaw, args.pitch, args.roll, args.fov, &cfg)?;
            let summary = cli::cmd_noise(&calib, args.theta, args.seed, args.n, args.out.as_deref())?;
            eprintln!(
                "noise: n={} theta={} mean_abs_delta={}",
                summary.n, summary.theta_deg, summary.mean_abs_delta_deg
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
