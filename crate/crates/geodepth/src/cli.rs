//! Implementations behind the command-line surface: config-file schema,
//! flag/config/default resolution, and the body of each subcommand. The
//! binary itself only parses arguments and prints what these return.
//!
//! Structured outputs are JSON, curves are CSV (`x,y,n`; scatter rows are
//! `image_id,median_gt,median_pred`), rasters are PFM. Exit codes: 0 on
//! success, 2 for usage/config errors, 3 for I/O/format/data errors, 4 for
//! contract violations such as empty selections.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GeodepthError, Result};
use crate::eval::{
    self, CurvePoint, DepthMetrics, EvalSelection,
};
use crate::io;
use crate::losses::LossConfig;
use crate::projection::extract_cutout;
use crate::raster::{Geocalibration, Raster2D};
use crate::register::{register_orientation, RegistrationResult, SearchGrid};
use crate::testkit::{generate_scene, SceneSpec};
use crate::voxel::{
    render_panorama, voxelize, RayCastConfig, DEFAULT_CELL_Z_M, DEFAULT_EYE_HEIGHT_M,
    DEFAULT_PANO_WIDTH,
};

/// Default ground-truth depth cap in meters for metric evaluation.
pub const DEFAULT_DEPTH_CAP_M: f64 = 80.0;
/// Default bin width for the error-vs-distance curve, meters.
pub const DEFAULT_BIN_WIDTH_M: f64 = 10.0;
/// Default axis limit for the error-vs-distance curve, meters.
pub const DEFAULT_MAX_DIST_M: f64 = 400.0;

/// Default cap set for the RMSE-vs-depth-cap curve, meters.
pub fn default_caps() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 40.0).collect()
}

/// On-disk run configuration. Every field mirrors a CLI flag and is optional;
/// flags override file values. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub raycast: RaycastSection,
    pub calib: CalibSection,
    pub eval: EvalSection,
    pub search: SearchSection,
    pub loss: LossSection,
    pub paths: PathsSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RaycastSection {
    pub step_m: Option<f64>,
    pub max_range_m: Option<f64>,
    pub pano_width: Option<usize>,
    pub pano_height: Option<usize>,
    pub eye_height_m: Option<f64>,
    pub cell_z_m: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibSection {
    pub yaw_deg: Option<f64>,
    pub pitch_deg: Option<f64>,
    pub roll_deg: Option<f64>,
    pub fov_deg: Option<f64>,
    pub eye_height_m: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub depth_cap_m: Option<f64>,
    pub min_depth_m: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub yaw_min_deg: Option<f64>,
    pub yaw_max_deg: Option<f64>,
    pub yaw_step_deg: Option<f64>,
    pub pitch_min_deg: Option<f64>,
    pub pitch_max_deg: Option<f64>,
    pub pitch_step_deg: Option<f64>,
    pub roll_deg: Option<f64>,
    pub fov_deg: Option<f64>,
    pub min_overlap_frac: Option<f64>,
    pub top_k: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub delta: Option<f64>,
    pub alpha_h: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub heights: Option<PathBuf>,
    pub pano: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub query: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Parse and validate a config file. All errors here are usage errors.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| GeodepthError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| GeodepthError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()
        .map_err(|e| GeodepthError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

impl RunConfig {
    /// Reject out-of-range values before any computation starts.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: Option<f64>) -> Result<()> {
            if let Some(v) = v {
                if !v.is_finite() || v <= 0.0 {
                    return Err(GeodepthError::Config(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
            Ok(())
        }
        fn finite(name: &str, v: Option<f64>) -> Result<()> {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(GeodepthError::Config(format!("{name} must be finite, got {v}")));
                }
            }
            Ok(())
        }
        positive("raycast.step_m", self.raycast.step_m)?;
        positive("raycast.max_range_m", self.raycast.max_range_m)?;
        positive("raycast.cell_z_m", self.raycast.cell_z_m)?;
        finite("raycast.eye_height_m", self.raycast.eye_height_m)?;
        finite("calib.yaw_deg", self.calib.yaw_deg)?;
        finite("calib.pitch_deg", self.calib.pitch_deg)?;
        finite("calib.roll_deg", self.calib.roll_deg)?;
        positive("calib.fov_deg", self.calib.fov_deg)?;
        positive("eval.depth_cap_m", self.eval.depth_cap_m)?;
        finite("eval.min_depth_m", self.eval.min_depth_m)?;
        finite("search.yaw_min_deg", self.search.yaw_min_deg)?;
        finite("search.yaw_max_deg", self.search.yaw_max_deg)?;
        positive("search.yaw_step_deg", self.search.yaw_step_deg)?;
        finite("search.pitch_min_deg", self.search.pitch_min_deg)?;
        finite("search.pitch_max_deg", self.search.pitch_max_deg)?;
        positive("search.pitch_step_deg", self.search.pitch_step_deg)?;
        finite("search.roll_deg", self.search.roll_deg)?;
        positive("search.fov_deg", self.search.fov_deg)?;
        LossConfig {
            delta: self.loss.delta.unwrap_or(crate::losses::DEFAULT_DELTA),
            alpha_h: self.loss.alpha_h.unwrap_or(crate::losses::ALPHA_H_INITIAL),
        }
        .validate()
        .map_err(|e| GeodepthError::Config(e.to_string()))?;
        if let Some(f) = self.search.min_overlap_frac {
            if !(0.0..=1.0).contains(&f) {
                return Err(GeodepthError::Config(format!(
                    "search.min_overlap_frac must lie in [0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// First of flag value, config value, or the built-in default.
pub fn resolve<T: Copy>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

pub fn resolve_opt<T: Copy>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

// ---------------------------------------------------------------------------
// scene

/// Generate a synthetic scene and write it as PFM plus sidecar. The sidecar
/// records the eye height and vertical voxel size later stages default to.
pub fn cmd_scene(
    spec: &SceneSpec,
    eye_height_m: f64,
    cell_z_m: f64,
    out: &Path,
) -> Result<SceneSummary> {
    let map = generate_scene(spec)?;
    let sidecar = io::GeoSidecar {
        gsd_m: map.gsd(),
        eye_height_m: Some(eye_height_m),
        vertical_voxel_m: Some(cell_z_m),
    };
    io::save_height_map(&map, &sidecar, out)?;
    Ok(SceneSummary {
        width: map.width(),
        height: map.height(),
        gsd_m: map.gsd(),
        max_height_m: map.max_value(),
        out: out.to_path_buf(),
    })
}

#[derive(Clone, Debug)]
pub struct SceneSummary {
    pub width: usize,
    pub height: usize,
    pub gsd_m: f64,
    pub max_height_m: f64,
    pub out: PathBuf,
}

impl fmt::Display for SceneSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scene: {}x{} gsd={} max_height={} -> {}",
            self.width,
            self.height,
            self.gsd_m,
            self.max_height_m,
            self.out.display()
        )
    }
}

// ---------------------------------------------------------------------------
// synth

#[derive(Clone, Debug)]
pub struct SynthSummary {
    pub width: usize,
    pub height: usize,
    pub hit_fraction: f64,
    pub min_depth: Option<f64>,
    pub max_depth: Option<f64>,
    pub out: PathBuf,
}

impl fmt::Display for SynthSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "synth: {}x{} hit_fraction={:.6} min_depth={} max_depth={} -> {}",
            self.width,
            self.height,
            self.hit_fraction,
            self.min_depth.map_or("n/a".into(), |v| v.to_string()),
            self.max_depth.map_or("n/a".into(), |v| v.to_string()),
            self.out.display()
        )
    }
}

/// Render a depth panorama from a height raster: normalize to min zero,
/// voxelize, ray cast, save. Defaults: step of half the ground sample
/// distance, max range of half the grid diagonal, 1024x512 output, eye
/// height and vertical voxel size from the sidecar (2.5 m / 1 m when absent).
pub fn cmd_synth(
    heights_path: &Path,
    out: &Path,
    overrides: &RaycastSection,
) -> Result<SynthSummary> {
    let (map, sidecar) = io::load_height_map(heights_path)?;
    let map = crate::raster::normalize_height(&map)?;
    let cell_z = overrides
        .cell_z_m
        .or(sidecar.vertical_voxel_m)
        .unwrap_or(DEFAULT_CELL_Z_M);
    let grid = voxelize(&map, cell_z)?;
    let defaults = RayCastConfig::defaults_for(&grid);
    let pano_width = overrides.pano_width.unwrap_or(DEFAULT_PANO_WIDTH);
    let cfg = RayCastConfig {
        step_m: overrides.step_m.unwrap_or(defaults.step_m),
        max_range_m: overrides.max_range_m.unwrap_or(defaults.max_range_m),
        pano_width,
        pano_height: overrides.pano_height.unwrap_or(pano_width / 2),
        eye_height_m: overrides
            .eye_height_m
            .or(sidecar.eye_height_m)
            .unwrap_or(DEFAULT_EYE_HEIGHT_M),
    };
    let pano = render_panorama(&grid, &cfg)?;
    io::save_depth(&pano, out)?;
    let range = pano.finite_range();
    Ok(SynthSummary {
        width: pano.width(),
        height: pano.height(),
        hit_fraction: pano.hit_fraction(),
        min_depth: range.map(|r| r.0),
        max_depth: range.map(|r| r.1),
        out: out.to_path_buf(),
    })
}

// ---------------------------------------------------------------------------
// cutout

pub fn cmd_cutout(
    pano_path: &Path,
    out: &Path,
    calib: &Geocalibration,
    out_w: usize,
    out_h: usize,
) -> Result<()> {
    let pano = io::load_depth(pano_path)?;
    let cut = extract_cutout(&pano, calib, out_w, out_h)?;
    io::save_depth(&cut, out)
}

// ---------------------------------------------------------------------------
// metrics / calibrate

#[derive(Clone, Debug, PartialEq)]
pub enum ScaleMode {
    None,
    /// Median scaling against the ground truth itself.
    MedianGt,
    /// Median scaling against a separate reference raster (e.g. a synthetic
    /// overhead-derived cutout).
    MedianRef(PathBuf),
}

impl ScaleMode {
    fn label(&self) -> String {
        match self {
            ScaleMode::None => "none".into(),
            ScaleMode::MedianGt => "median-gt".into(),
            ScaleMode::MedianRef(_) => "median-ref".into(),
        }
    }
}

/// Everything `metrics` reports: the seven metrics on the (possibly scaled)
/// prediction, the scale factor used, selection counts, and the per-image
/// median pair (computed on the unscaled prediction; their ratio is the
/// median-scaling factor).
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub metrics: DepthMetrics,
    pub scale_mode: String,
    pub scale_factor: f64,
    pub n_valid: usize,
    pub n_total: usize,
    pub n_over_cap: usize,
    pub depth_cap_m: f64,
    pub min_depth_m: f64,
    pub median_gt: f64,
    pub median_pred: f64,
}

pub fn cmd_metrics(
    pred_path: &Path,
    gt_path: &Path,
    sel: &EvalSelection,
    mode: &ScaleMode,
) -> Result<MetricsReport> {
    let pred = io::load_depth(pred_path)?;
    let gt = io::load_depth(gt_path)?;
    let scale_factor = match mode {
        ScaleMode::None => 1.0,
        ScaleMode::MedianGt => eval::median_scale_factor(&pred, &gt, sel)?,
        ScaleMode::MedianRef(ref_path) => {
            let reference = io::load_depth(ref_path)?;
            eval::median_scale_factor(&pred, &reference, sel)?
        }
    };
    let scaled = eval::apply_scale(&pred, scale_factor)?;
    let metrics = eval::compute_metrics(&scaled, &gt, sel)?;
    let n_valid = eval::valid_pixel_count(&scaled, &gt, sel)?;
    let uncapped = EvalSelection { depth_cap: f64::INFINITY, ..sel.clone() };
    let n_over_cap = eval::valid_pixel_count(&scaled, &gt, &uncapped)? - n_valid;
    let (median_gt, median_pred) = eval::scale_scatter(&pred, &gt, sel)?;
    Ok(MetricsReport {
        metrics,
        scale_mode: mode.label(),
        scale_factor,
        n_valid,
        n_total: gt.len(),
        n_over_cap,
        depth_cap_m: sel.depth_cap,
        min_depth_m: sel.min_depth,
        median_gt,
        median_pred,
    })
}

// ---------------------------------------------------------------------------
// curves

#[derive(Clone, Debug)]
pub enum CurveMode {
    Distance { bin_width_m: f64, max_dist_m: f64 },
    Cap { caps: Vec<f64> },
    /// One `image_id,median_gt,median_pred` row per prediction/truth pair.
    Scatter,
}

fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("x,y,n\n");
    for p in points {
        let y = p.y.map_or(String::new(), |v| v.to_string());
        out.push_str(&format!("{},{},{}\n", p.x, y, p.n));
    }
    out
}

pub fn cmd_curves(
    pairs: &[(PathBuf, PathBuf)],
    sel: &EvalSelection,
    mode: &CurveMode,
    out: &Path,
) -> Result<()> {
    let csv = match mode {
        CurveMode::Distance { bin_width_m, max_dist_m } => {
            let [(pred_path, gt_path)] = pairs else {
                return Err(GeodepthError::Config(
                    "distance curves take exactly one --pred/--gt pair".into(),
                ));
            };
            let pred = io::load_depth(pred_path)?;
            let gt = io::load_depth(gt_path)?;
            curve_csv(&eval::error_vs_distance(&pred, &gt, sel, *bin_width_m, *max_dist_m)?)
        }
        CurveMode::Cap { caps } => {
            let [(pred_path, gt_path)] = pairs else {
                return Err(GeodepthError::Config(
                    "cap curves take exactly one --pred/--gt pair".into(),
                ));
            };
            let pred = io::load_depth(pred_path)?;
            let gt = io::load_depth(gt_path)?;
            curve_csv(&eval::rmse_vs_depthcap(&pred, &gt, sel, caps)?)
        }
        CurveMode::Scatter => {
            let mut out = String::from("image_id,median_gt,median_pred\n");
            for (pred_path, gt_path) in pairs {
                let pred = io::load_depth(pred_path)?;
                let gt = io::load_depth(gt_path)?;
                let (mg, mp) = eval::scale_scatter(&pred, &gt, sel)?;
                let id = pred_path
                    .file_stem()
                    .map_or_else(|| pred_path.display().to_string(), |s| {
                        s.to_string_lossy().into_owned()
                    });
                out.push_str(&format!("{id},{mg},{mp}\n"));
            }
            out
        }
    };
    fs::write(out, csv).map_err(|e| GeodepthError::io(out, e))
}

// ---------------------------------------------------------------------------
// register

pub fn cmd_register(
    query_path: &Path,
    pano_path: &Path,
    grid: &SearchGrid,
) -> Result<RegistrationResult> {
    let query = io::load_depth(query_path)?;
    let pano = io::load_depth(pano_path)?;
    register_orientation(&query, &pano, grid)
}

// ---------------------------------------------------------------------------
// noise

#[derive(Clone, Debug, Serialize)]
pub struct NoiseSummary {
    pub n: u64,
    pub theta_deg: f64,
    pub seed: u64,
    pub mean_abs_delta_deg: f64,
}

/// Draw `n` perturbed headings (row `i` uses seed `seed + i`) and report the
/// mean absolute yaw deviation. The CSV has an `index,yaw_deg,delta_deg`
/// header, one row per draw, and a final `summary,,<mean>` row.
pub fn cmd_noise(
    calib: &Geocalibration,
    theta_deg: f64,
    seed: u64,
    n: u64,
    out: Option<&Path>,
) -> Result<NoiseSummary> {
    if !theta_deg.is_finite() || theta_deg < 0.0 {
        return Err(GeodepthError::Config(format!(
            "theta must be non-negative, got {theta_deg}"
        )));
    }
    if n == 0 {
        return Err(GeodepthError::Config("need at least one draw".into()));
    }
    let mut csv = String::from("index,yaw_deg,delta_deg\n");
    let mut sum_abs = 0.0;
    for i in 0..n {
        let perturbed = eval::inject_heading_noise(calib, theta_deg, seed.wrapping_add(i));
        let delta =
            (perturbed.yaw_deg - calib.yaw_deg + 540.0).rem_euclid(360.0) - 180.0;
        sum_abs += delta.abs();
        csv.push_str(&format!("{i},{},{delta}\n", perturbed.yaw_deg));
    }
    let mean = sum_abs / n as f64;
    csv.push_str(&format!("summary,,{mean}\n"));
    if let Some(path) = out {
        fs::write(path, csv).map_err(|e| GeodepthError::io(path, e))?;
    } else {
        print!("{csv}");
    }
    Ok(NoiseSummary { n, theta_deg, seed, mean_abs_delta_deg: mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::SceneKind;

    #[test]
    fn unknown_config_keys_are_rejected() {
        let cfg: std::result::Result<RunConfig, _> =
            serde_json::from_str(r#"{"raycast": {"step_m": 0.5, "bogus": 1}}"#);
        assert!(cfg.is_err());
        let cfg: std::result::Result<RunConfig, _> = serde_json::from_str(r#"{"unknown": {}}"#);
        assert!(cfg.is_err());
    }

    #[test]
    fn config_values_are_validated_up_front() {
        let cfg: RunConfig = serde_json::from_str(r#"{"raycast": {"step_m": -1.0}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(GeodepthError::Config(_))));
        let cfg: RunConfig = serde_json::from_str(r#"{"loss": {"alpha_h": -0.5}}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig =
            serde_json::from_str(r#"{"search": {"min_overlap_frac": 1.5}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resolution_order_is_flag_config_default() {
        assert_eq!(resolve(Some(1.0), Some(2.0), 3.0), 1.0);
        assert_eq!(resolve(None, Some(2.0), 3.0), 2.0);
        assert_eq!(resolve::<f64>(None, None, 3.0), 3.0);
    }

    #[test]
    fn synth_defaults_come_from_the_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let heights = dir.path().join("scene.pfm");
        let spec = SceneSpec {
            width: 32,
            height: 32,
            gsd: 2.0,
            seed: 0,
            kind: SceneKind::Flat,
        };
        cmd_scene(&spec, 4.0, 0.5, &heights).unwrap();
        let out = dir.path().join("pano.pfm");
        let summary = cmd_synth(
            &heights,
            &out,
            &RaycastSection { pano_width: Some(64), pano_height: Some(32), ..Default::default() },
        )
        .unwrap();
        assert_eq!((summary.width, summary.height), (64, 32));
        // Flat scene: straight-down pixels hit around the sidecar eye height.
        let pano = io::load_depth(&out).unwrap();
        let bottom = pano.at(0, 31);
        assert!(bottom > 0.0 && (bottom - 4.0).abs() < 1.5, "bottom {bottom}");
    }

    #[test]
    fn noise_zero_theta_keeps_the_heading() {
        let calib = Geocalibration::new(123.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("noise.csv");
        let summary = cmd_noise(&calib, 0.0, 9, 25, Some(&out)).unwrap();
        assert_eq!(summary.mean_abs_delta_deg, 0.0);
        let text = fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,yaw_deg,delta_deg"));
        for (i, line) in lines.enumerate() {
            if i < 25 {
                assert_eq!(line, format!("{i},123,0"));
            } else {
                assert_eq!(line, "summary,,0");
            }
        }
    }
}
