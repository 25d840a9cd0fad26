//! Procedural test scenes and brute-force reference renderers.
//!
//! Everything here favors obviousness over speed: the oracles march every
//! sample of every ray with no acceleration, and ship with the library (not
//! just its tests) so any rendering discrepancy can be audited against them.
//! [`oracle_render`] defines ground truth for [`crate::voxel::render_panorama`]
//! and the two must agree bit-for-bit under identical configuration;
//! [`oracle_perspective`] casts per-pixel rays directly from the heightfield,
//! bypassing the panorama, to bound cutout resampling error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeodepthError, Result};
use crate::geom;
use crate::projection::pixel_to_direction;
use crate::raster::{
    DepthPanorama, Geocalibration, HeightMap, PerspectiveDepthMap, Raster2D, SENTINEL,
};
use crate::voxel::RayCastConfig;

/// Deterministic RNG used by scene generation and randomized tests.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parametric description of a synthetic height-map scene. Generation is a
/// pure function of the spec (randomized kinds draw from the seed).
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub gsd: f64,
    pub seed: u64,
    pub kind: SceneKind,
}

#[derive(Clone, Debug)]
pub enum SceneKind {
    /// All zeros.
    Flat,
    /// A single full-width wall north of the camera, covering raster pixels
    /// whose center distance lies in `[distance_m, distance_m + thickness_m)`.
    Wall {
        distance_m: f64,
        height_m: f64,
        thickness_m: f64,
    },
    /// Seeded rectangular boxes scattered outside a clear zone around the
    /// camera; overlaps keep the taller box.
    BoxField {
        count: usize,
        size_range_m: (f64, f64),
        height_range_m: (f64, f64),
    },
    /// Height increasing linearly northward from zero at the southern edge.
    Ramp { slope: f64 },
}

impl SceneSpec {
    /// A default box-field: a dozen boxes, 4-20 m across, 4-25 m tall.
    pub fn box_field(width: usize, height: usize, gsd: f64, seed: u64) -> Self {
        SceneSpec {
            width,
            height,
            gsd,
            seed,
            kind: SceneKind::BoxField {
                count: 12,
                size_range_m: (4.0, 20.0),
                height_range_m: (4.0, 25.0),
            },
        }
    }
}

/// Clear radius kept around the camera by the box-field generator, meters.
const CAMERA_CLEARANCE_M: f64 = 6.0;

/// Materialize a scene spec into a min-zero height map.
pub fn generate_scene(spec: &SceneSpec) -> Result<HeightMap> {
    if spec.width == 0 || spec.height == 0 {
        return Err(GeodepthError::SceneSpec(format!(
            "scene dimensions must be positive, got {}x{}",
            spec.width, spec.height
        )));
    }
    if !spec.gsd.is_finite() || spec.gsd <= 0.0 {
        return Err(GeodepthError::SceneSpec(format!("gsd must be positive, got {}", spec.gsd)));
    }
    let (w, h, gsd) = (spec.width, spec.height, spec.gsd);
    let cy = h / 2;
    let mut values = vec![0.0f64; w * h];

    match spec.kind {
        SceneKind::Flat => {}
        SceneKind::Wall { distance_m, height_m, thickness_m } => {
            if distance_m <= 0.0 || height_m <= 0.0 || thickness_m <= 0.0 {
                return Err(GeodepthError::SceneSpec(
                    "wall distance, height, and thickness must be positive".into(),
                ));
            }
            let north_extent = cy as f64 * gsd;
            if distance_m + thickness_m > north_extent {
                return Err(GeodepthError::SceneSpec(format!(
                    "wall at {distance_m}+{thickness_m} m exceeds the {north_extent} m \
                     northern half-extent of the grid"
                )));
            }
            let mut rows = 0usize;
            for row in 0..h {
                let x_north = (cy as f64 - row as f64) * gsd;
                if x_north >= distance_m && x_north < distance_m + thickness_m {
                    for col in 0..w {
                        values[row * w + col] = height_m;
                    }
                    rows += 1;
                }
            }
            if rows == 0 {
                return Err(GeodepthError::SceneSpec(format!(
                    "wall slab [{distance_m}, {}) covers no raster row at gsd {gsd}",
                    distance_m + thickness_m
                )));
            }
        }
        SceneKind::BoxField { count, size_range_m, height_range_m } => {
            let (smin, smax) = size_range_m;
            let (hmin, hmax) = height_range_m;
            if smin <= 0.0 || smax < smin || hmin <= 0.0 || hmax < hmin {
                return Err(GeodepthError::SceneSpec("box ranges must be positive".into()));
            }
            let max_px = (smax / gsd).round() as usize;
            if max_px >= w.min(h) {
                return Err(GeodepthError::SceneSpec(format!(
                    "boxes up to {smax} m do not fit a {w}x{h} grid at gsd {gsd}"
                )));
            }
            let cx = w / 2;
            let clear = (CAMERA_CLEARANCE_M / gsd).ceil() as i64;
            let mut rng = seeded_rng(spec.seed);
            for _ in 0..count {
                // Rejection-sample a placement clear of the camera; give up
                // on a box after a bounded number of tries to stay total.
                for _attempt in 0..64 {
                    let bw = ((rng.gen_range(smin..=smax) / gsd).round() as usize).max(1);
                    let bh = ((rng.gen_range(smin..=smax) / gsd).round() as usize).max(1);
                    if bw >= w || bh >= h {
                        continue;
                    }
                    let x0 = rng.gen_range(0..=w - bw);
                    let y0 = rng.gen_range(0..=h - bh);
                    let box_h = rng.gen_range(hmin..=hmax);
                    let (x1, y1) = (x0 + bw, y0 + bh);
                    let near_camera = (x0 as i64) <= cx as i64 + clear
                        && (x1 as i64) >= cx as i64 - clear
                        && (y0 as i64) <= cy as i64 + clear
                        && (y1 as i64) >= cy as i64 - clear;
                    if near_camera {
                        continue;
                    }
                    for y in y0..y1 {
                        for x in x0..x1 {
                            let v = &mut values[y * w + x];
                            *v = v.max(box_h);
                        }
                    }
                    break;
                }
            }
        }
        SceneKind::Ramp { slope } => {
            if !slope.is_finite() || slope <= 0.0 {
                return Err(GeodepthError::SceneSpec(format!(
                    "ramp slope must be positive, got {slope}"
                )));
            }
            for row in 0..h {
                let rise = slope * gsd * (h - 1 - row) as f64;
                for col in 0..w {
                    values[row * w + col] = rise;
                }
            }
        }
    }

    HeightMap::new(w, h, gsd, values)
}

/// Shared inline hit test of the marching recipe; kept in one place so the
/// oracles and any analytic check read the identical arithmetic.
#[inline]
#[allow(clippy::too_many_arguments)]
fn hits_heightfield(
    heights: &[f64],
    w: usize,
    h: usize,
    gsd: f64,
    cell_z: f64,
    cx_f: f64,
    cy_f: f64,
    px: f64,
    py: f64,
    pz: f64,
) -> bool {
    if pz <= 0.0 {
        return true;
    }
    let col = (cx_f + py / gsd + 0.5).floor();
    if col < 0.0 || col >= w as f64 {
        return false;
    }
    let row = (cy_f - px / gsd - 0.5).ceil();
    if row < 0.0 || row >= h as f64 {
        return false;
    }
    let k = (pz / cell_z).floor();
    k * cell_z < heights[(row as usize) * w + col as usize]
}

fn oracle_camera_elevation(h: &HeightMap, cell_z: f64, eye_height_m: f64) -> Result<f64> {
    let (cx, cy) = h.center_pixel();
    let cam_z = h.at(cx, cy) + eye_height_m;
    if cam_z <= 0.0 {
        return Err(GeodepthError::DegenerateOrigin(format!(
            "camera elevation {cam_z} is inside the ground half-space"
        )));
    }
    let k = (cam_z / cell_z).floor();
    if k * cell_z < h.at(cx, cy) {
        return Err(GeodepthError::DegenerateOrigin(format!(
            "camera at elevation {cam_z} sits inside the occupied voxel column at the grid center"
        )));
    }
    Ok(cam_z)
}

/// Reference panorama renderer: the plain triple loop over rows, columns,
/// and samples, with no early exits. Ground truth for
/// [`crate::voxel::render_panorama`].
pub fn oracle_render(h: &HeightMap, cell_z: f64, cfg: &RayCastConfig) -> Result<DepthPanorama> {
    cfg.validate()?;
    if !cell_z.is_finite() || cell_z <= 0.0 {
        return Err(GeodepthError::Contract(format!("cell_z must be positive, got {cell_z}")));
    }
    let cam_z = oracle_camera_elevation(h, cell_z, cfg.eye_height_m)?;
    let (w, ph) = (cfg.pano_width, cfg.pano_height);
    let (cx, cy) = h.center_pixel();
    let (cx_f, cy_f) = (cx as f64, cy as f64);
    let n_steps = (cfg.max_range_m / cfg.step_m).floor() as u64;

    let mut values = vec![SENTINEL; w * ph];
    for row in 0..ph {
        for col in 0..w {
            let (az, el) = geom::pano_pixel_center_angles(col, row, w, ph);
            let dir = geom::ray_direction(az, el);
            for i in 1..=n_steps {
                let t = i as f64 * cfg.step_m;
                let px = t * dir[0];
                let py = t * dir[1];
                let pz = cam_z + t * dir[2];
                if hits_heightfield(
                    h.values(),
                    h.width(),
                    h.height(),
                    h.gsd(),
                    cell_z,
                    cx_f,
                    cy_f,
                    px,
                    py,
                    pz,
                ) {
                    values[row * w + col] = t;
                    break;
                }
            }
        }
    }
    DepthPanorama::new(w, ph, values)
}

/// Reference perspective renderer: one ray per output pixel cast directly
/// against the heightfield via [`pixel_to_direction`], bypassing the
/// panorama entirely.
pub fn oracle_perspective(
    h: &HeightMap,
    calib: &Geocalibration,
    cell_z: f64,
    cfg: &RayCastConfig,
    out_w: usize,
    out_h: usize,
) -> Result<PerspectiveDepthMap> {
    if out_w == 0 || out_h == 0 {
        return Err(GeodepthError::Contract("cutout dimensions must be positive".into()));
    }
    if cfg.step_m <= 0.0 || cfg.max_range_m <= cfg.step_m {
        return Err(GeodepthError::Contract("step and max_range must be positive".into()));
    }
    if !cell_z.is_finite() || cell_z <= 0.0 {
        return Err(GeodepthError::Contract(format!("cell_z must be positive, got {cell_z}")));
    }
    let cam_z = oracle_camera_elevation(h, cell_z, calib.eye_height_m)?;
    let (cx, cy) = h.center_pixel();
    let (cx_f, cy_f) = (cx as f64, cy as f64);
    let n_steps = (cfg.max_range_m / cfg.step_m).floor() as u64;

    let mut values = vec![SENTINEL; out_w * out_h];
    for v in 0..out_h {
        for u in 0..out_w {
            let dir = pixel_to_direction(calib, u, v, out_w, out_h).direction();
            for i in 1..=n_steps {
                let t = i as f64 * cfg.step_m;
                let px = t * dir[0];
                let py = t * dir[1];
                let pz = cam_z + t * dir[2];
                if hits_heightfield(
                    h.values(),
                    h.width(),
                    h.height(),
                    h.gsd(),
                    cell_z,
                    cx_f,
                    cy_f,
                    px,
                    py,
                    pz,
                ) {
                    values[v * out_w + u] = t;
                    break;
                }
            }
        }
    }
    PerspectiveDepthMap::new(out_w, out_h, values, Some(calib.clone()))
}

/// Continuous-surface probe along one ray: like the discrete march but a
/// sample hits whenever it lies strictly below the heightfield itself
/// (`z < h`) rather than inside a voxel. Used only for convergence checks of
/// the voxelized caster as `cell_z` shrinks.
pub fn oracle_depth_continuous(
    h: &HeightMap,
    azimuth_deg: f64,
    elevation_deg: f64,
    eye_height_m: f64,
    cfg: &RayCastConfig,
) -> f64 {
    let (cx, cy) = h.center_pixel();
    let (cx_f, cy_f) = (cx as f64, cy as f64);
    let cam_z = h.at(cx, cy) + eye_height_m;
    let dir = geom::ray_direction(azimuth_deg, elevation_deg);
    let n_steps = (cfg.max_range_m / cfg.step_m).floor() as u64;
    for i in 1..=n_steps {
        let t = i as f64 * cfg.step_m;
        let px = t * dir[0];
        let py = t * dir[1];
        let pz = cam_z + t * dir[2];
        if pz <= 0.0 {
            return t;
        }
        let col = (cx_f + py / h.gsd() + 0.5).floor();
        let row = (cy_f - px / h.gsd() - 0.5).ceil();
        if (col >= 0.0 && col < h.width() as f64 && row >= 0.0 && row < h.height() as f64)
            && pz < h.at(col as usize, row as usize)
        {
            return t;
        }
    }
    SENTINEL
}
