//! Voxel occupancy grids derived from height maps, and the uniform-sampling
//! ray caster that renders metric equirectangular depth panoramas from the
//! grid center.
//!
//! A column of the height map fills voxel layers from the ground up: voxel
//! `(x, y, k)` is occupied iff `k * cell_z < h(x, y)`. The camera stands at
//! the center pixel, `eye_height` meters above the terrain there. Rays are
//! sampled at uniform distances `step, 2*step, ...` out to `max_range`; the
//! reported depth is the first sample inside an occupied voxel or in the
//! ground half-space `z <= 0` (the terrain base plane after min-zero
//! normalization), or the -1 sentinel if nothing is hit.
//!
//! # Sample-to-pixel mapping
//!
//! With the camera at the center of pixel `(cx, cy) = (nx / 2, ny / 2)`, a
//! sample at world `(x north, y east, z up)` falls in the raster pixel whose
//! center is nearest, with each pixel owning the half-open square
//! `[center - gsd/2, center + gsd/2)` along both world axes:
//!
//! ```text
//! col = floor(cx + y / gsd + 0.5)      row = ceil(cy - x / gsd - 0.5)
//! ```
//!
//! Samples outside the raster are misses (no terrain is known there); the
//! ground half-space is infinite. Rendering is a pure function of
//! `(grid, config)`: identical bits regardless of thread count.

use rayon::prelude::*;

use crate::error::{GeodepthError, Result};
use crate::geom;
use crate::raster::{DepthPanorama, HeightMap, Raster2D, SENTINEL};

/// Street-level capture height above terrain, meters.
pub const DEFAULT_EYE_HEIGHT_M: f64 = 2.5;
/// Vertical voxel layer thickness, meters.
pub const DEFAULT_CELL_Z_M: f64 = 1.0;
/// Default output panorama width (2:1 equirectangular).
pub const DEFAULT_PANO_WIDTH: usize = 1024;

/// Boolean occupancy lattice over a height map's footprint.
///
/// Occupancy is column-monotone (everything below the surface is filled), so
/// the grid stores one height per column and evaluates the defining predicate
/// `k * cell_z < h(x, y)` on demand — exactly the rule tests enumerate.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    cell_xy: f64,
    cell_z: f64,
    column_height: Vec<f64>,
    max_height: f64,
}

impl VoxelGrid {
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    /// Number of vertical layers: `ceil(max height / cell_z)`, at least 1.
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn cell_xy(&self) -> f64 {
        self.cell_xy
    }
    pub fn cell_z(&self) -> f64 {
        self.cell_z
    }
    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    /// The occupancy predicate: voxel `(x, y, k)` is filled iff
    /// `k * cell_z < h(x, y)`.
    pub fn occupied(&self, x: usize, y: usize, k: usize) -> bool {
        debug_assert!(x < self.nx && y < self.ny);
        (k as f64) * self.cell_z < self.column_height[y * self.nx + x]
    }

    pub fn column_height_at(&self, x: usize, y: usize) -> f64 {
        self.column_height[y * self.nx + x]
    }

    /// Pixel the camera stands on.
    pub fn center_pixel(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    fn center_terrain_height(&self) -> f64 {
        let (cx, cy) = self.center_pixel();
        self.column_height[cy * self.nx + cx]
    }
}

/// Convert a min-zero-normalized height map into a voxel occupancy grid with
/// vertical layer thickness `cell_z`.
pub fn voxelize(h: &HeightMap, cell_z: f64) -> Result<VoxelGrid> {
    if !cell_z.is_finite() || cell_z <= 0.0 {
        return Err(GeodepthError::Contract(format!("cell_z must be positive, got {cell_z}")));
    }
    let min = h.min_value();
    if min != 0.0 {
        return Err(GeodepthError::Contract(format!(
            "height map must be normalized (min == 0) before voxelization, found min {min}"
        )));
    }
    let max_height = h.max_value();
    let nz = ((max_height / cell_z).ceil() as usize).max(1);
    Ok(VoxelGrid {
        nx: h.width(),
        ny: h.height(),
        nz,
        cell_xy: h.gsd(),
        cell_z,
        column_height: h.values().to_vec(),
        max_height,
    })
}

/// Ray-march parameters. `pano_width` must be twice `pano_height`
/// (equirectangular aspect).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayCastConfig {
    pub step_m: f64,
    pub max_range_m: f64,
    pub pano_width: usize,
    pub pano_height: usize,
    pub eye_height_m: f64,
}

impl RayCastConfig {
    /// Defaults for a grid: step of half the ground sample distance,
    /// max range of half the grid diagonal (rays never report hits beyond
    /// known terrain), a 1024x512 panorama, and street-level eye height.
    pub fn defaults_for(grid: &VoxelGrid) -> Self {
        let w = grid.nx as f64 * grid.cell_xy;
        let h = grid.ny as f64 * grid.cell_xy;
        RayCastConfig {
            step_m: grid.cell_xy / 2.0,
            max_range_m: 0.5 * (w * w + h * h).sqrt(),
            pano_width: DEFAULT_PANO_WIDTH,
            pano_height: DEFAULT_PANO_WIDTH / 2,
            eye_height_m: DEFAULT_EYE_HEIGHT_M,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.step_m.is_finite() || self.step_m <= 0.0 {
            return Err(GeodepthError::Contract(format!(
                "step must be positive, got {}",
                self.step_m
            )));
        }
        if !self.max_range_m.is_finite() || self.max_range_m <= self.step_m {
            return Err(GeodepthError::Contract(format!(
                "max_range ({}) must exceed step ({})",
                self.max_range_m, self.step_m
            )));
        }
        if self.pano_height == 0 || self.pano_width != 2 * self.pano_height {
            return Err(GeodepthError::Contract(format!(
                "panorama must be 2:1 equirectangular, got {}x{}",
                self.pano_width, self.pano_height
            )));
        }
        if !self.eye_height_m.is_finite() {
            return Err(GeodepthError::Contract("eye height must be finite".into()));
        }
        Ok(())
    }
}

/// Camera elevation above the height datum, after checking the origin is not
/// degenerate (inside the ground half-space or an occupied voxel).
fn camera_elevation(grid: &VoxelGrid, cfg: &RayCastConfig) -> Result<f64> {
    let cam_z = grid.center_terrain_height() + cfg.eye_height_m;
    if cam_z <= 0.0 {
        return Err(GeodepthError::DegenerateOrigin(format!(
            "camera elevation {cam_z} is inside the ground half-space"
        )));
    }
    let (cx, cy) = grid.center_pixel();
    let k = (cam_z / grid.cell_z).floor() as usize;
    if grid.occupied(cx, cy, k) {
        return Err(GeodepthError::DegenerateOrigin(format!(
            "camera at elevation {cam_z} sits inside the occupied voxel column at the grid center"
        )));
    }
    Ok(cam_z)
}

/// Whether the sample point `(px, py, pz)` hits terrain: the ground
/// half-space, or an occupied voxel under the pixel that owns the point.
#[inline]
fn sample_hits(grid: &VoxelGrid, cx_f: f64, cy_f: f64, px: f64, py: f64, pz: f64) -> bool {
    if pz <= 0.0 {
        return true;
    }
    let col = (cx_f + py / grid.cell_xy + 0.5).floor();
    if col < 0.0 || col >= grid.nx as f64 {
        return false;
    }
    let row = (cy_f - px / grid.cell_xy - 0.5).ceil();
    if row < 0.0 || row >= grid.ny as f64 {
        return false;
    }
    let k = (pz / grid.cell_z).floor();
    k * grid.cell_z < grid.column_height[(row as usize) * grid.nx + col as usize]
}

/// March one ray; returns the first hit distance or the sentinel.
fn cast_ray(grid: &VoxelGrid, cfg: &RayCastConfig, cam_z: f64, az_deg: f64, el_deg: f64) -> f64 {
    let dir = geom::ray_direction(az_deg, el_deg);
    let (cx, cy) = grid.center_pixel();
    let (cx_f, cy_f) = (cx as f64, cy as f64);
    let n_steps = (cfg.max_range_m / cfg.step_m).floor() as u64;
    // Rays that never descend can stop once they are provably above every
    // voxel: z is weakly increasing, so no later sample can hit. The slack of
    // two layers absorbs any floating-point rounding in the layer index.
    let ceiling = grid.max_height + 2.0 * grid.cell_z;
    let ascending = dir[2] >= 0.0;
    for i in 1..=n_steps {
        let t = i as f64 * cfg.step_m;
        let px = t * dir[0];
        let py = t * dir[1];
        let pz = cam_z + t * dir[2];
        if ascending && pz > ceiling {
            return SENTINEL;
        }
        if sample_hits(grid, cx_f, cy_f, px, py, pz) {
            return t;
        }
    }
    SENTINEL
}

/// Render the full equirectangular depth panorama from the grid center.
///
/// Pixel `(col, row)` casts along the panorama convention's pixel-center
/// direction; the value is the minimum sampled distance that hits, or -1.
/// Parallel over pixels; output bits are schedule-independent.
pub fn render_panorama(grid: &VoxelGrid, cfg: &RayCastConfig) -> Result<DepthPanorama> {
    cfg.validate()?;
    let cam_z = camera_elevation(grid, cfg)?;
    let (w, h) = (cfg.pano_width, cfg.pano_height);
    let values: Vec<f64> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (col, row) = (idx % w, idx / w);
            let (az, el) = geom::pano_pixel_center_angles(col, row, w, h);
            cast_ray(grid, cfg, cam_z, az, el)
        })
        .collect();
    DepthPanorama::new(w, h, values)
}

/// Depth along a single ray. At panorama pixel-center directions this equals
/// the corresponding [`render_panorama`] pixel bit-for-bit.
pub fn heightfield_depth_at(
    grid: &VoxelGrid,
    azimuth_deg: f64,
    elevation_deg: f64,
    cfg: &RayCastConfig,
) -> Result<f64> {
    cfg.validate()?;
    let cam_z = camera_elevation(grid, cfg)?;
    Ok(cast_ray(grid, cfg, cam_z, azimuth_deg, elevation_deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::HeightMap;
    use rand::Rng;

    fn flat(w: usize, h: usize) -> HeightMap {
        HeightMap::new(w, h, 1.0, vec![0.0; w * h]).unwrap()
    }

    #[test]
    fn single_pixel_occupancy_follows_the_rule() {
        let h = HeightMap::new(2, 1, 1.0, vec![0.0, 3.0]).unwrap();
        let grid = voxelize(&h, 1.0).unwrap();
        assert!(grid.occupied(1, 0, 0));
        assert!(grid.occupied(1, 0, 1));
        assert!(grid.occupied(1, 0, 2));
        assert!(!grid.occupied(1, 0, 3)); // 3 > 3 is false
        assert!(!grid.occupied(0, 0, 0));
        assert_eq!(grid.nz(), 3);
    }

    #[test]
    fn all_zero_height_map_has_no_occupied_voxels() {
        let grid = voxelize(&flat(4, 4), 1.0).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                assert!(!grid.occupied(x, y, 0));
            }
        }
        assert_eq!(grid.nz(), 1);
    }

    #[test]
    fn voxelize_requires_normalized_input() {
        let h = HeightMap::new(2, 1, 1.0, vec![1.0, 2.0]).unwrap();
        assert!(matches!(voxelize(&h, 1.0), Err(GeodepthError::Contract(_))));
        let h = HeightMap::new(2, 1, 1.0, vec![-1.0, 2.0]).unwrap();
        assert!(voxelize(&h, 1.0).is_err());
    }

    #[test]
    fn occupancy_matches_exhaustive_enumeration() {
        let mut rng = crate::testkit::seeded_rng(17);
        for _ in 0..5 {
            let (w, h) = (16, 16);
            let mut values: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..30.0)).collect();
            values[3] = 0.0; // pin the minimum
            let cell_z = 0.75;
            let map = HeightMap::new(w, h, 1.0, values.clone()).unwrap();
            let grid = voxelize(&map, cell_z).unwrap();
            for y in 0..h {
                for x in 0..w {
                    for k in 0..grid.nz() + 2 {
                        let expected = (k as f64) * cell_z < values[y * w + x];
                        assert_eq!(grid.occupied(x, y, k), expected, "({x},{y},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn empty_scene_misses_above_the_horizon() {
        let grid = voxelize(&flat(32, 32), 1.0).unwrap();
        let cfg = RayCastConfig {
            pano_width: 64,
            pano_height: 32,
            ..RayCastConfig::defaults_for(&grid)
        };
        let pano = render_panorama(&grid, &cfg).unwrap();
        for row in 0..32 {
            for col in 0..64 {
                let (_, el) = geom::pano_pixel_center_angles(col, row, 64, 32);
                let v = pano.at(col, row);
                if el >= 0.0 {
                    assert_eq!(v, SENTINEL, "({col},{row}) el {el}");
                } else {
                    // Below the horizon the ground plane is hit whenever the
                    // slant range fits in max_range.
                    let t_ground = cfg.eye_height_m / (-el.to_radians().sin());
                    if t_ground <= cfg.max_range_m - cfg.step_m {
                        assert!(v > 0.0, "({col},{row}) el {el} expected ground hit");
                    }
                }
            }
        }
    }

    #[test]
    fn straight_down_ray_reports_eye_height() {
        let grid = voxelize(&flat(32, 32), 1.0).unwrap();
        let cfg = RayCastConfig::defaults_for(&grid);
        let d = heightfield_depth_at(&grid, 0.0, -90.0, &cfg).unwrap();
        assert!(
            (d - cfg.eye_height_m).abs() <= cfg.step_m,
            "down ray {d} vs eye {}",
            cfg.eye_height_m
        );
        // The horizontal north probe over empty terrain misses entirely.
        assert_eq!(heightfield_depth_at(&grid, 0.0, 0.0, &cfg).unwrap(), SENTINEL);
    }

    #[test]
    fn probe_matches_rendered_pixels_bit_for_bit() {
        let mut rng = crate::testkit::seeded_rng(23);
        let (w, h) = (24, 24);
        let mut values: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..12.0)).collect();
        values[0] = 0.0;
        let idx = (h / 2) * w + w / 2;
        values[idx] = 0.0; // keep the camera column open
        let map = HeightMap::new(w, h, 1.0, values).unwrap();
        let grid = voxelize(&map, 1.0).unwrap();
        let cfg = RayCastConfig {
            pano_width: 64,
            pano_height: 32,
            ..RayCastConfig::defaults_for(&grid)
        };
        let pano = render_panorama(&grid, &cfg).unwrap();
        for row in 0..32 {
            for col in 0..64 {
                let (az, el) = geom::pano_pixel_center_angles(col, row, 64, 32);
                let probe = heightfield_depth_at(&grid, az, el, &cfg).unwrap();
                assert_eq!(probe, pano.at(col, row), "({col},{row})");
            }
        }
    }

    #[test]
    fn camera_inside_occupied_column_is_degenerate() {
        let (w, h) = (9, 9);
        let mut values = vec![0.0; w * h];
        values[(h / 2) * w + w / 2] = 10.0;
        let map = HeightMap::new(w, h, 1.0, values).unwrap();
        let grid = voxelize(&map, 1.0).unwrap();
        // Eye height 2.5 puts the camera at z 12.5, above the 10 m column: fine.
        let cfg = RayCastConfig::defaults_for(&grid);
        assert!(render_panorama(&grid, &cfg).is_ok());
        // A negative eye height drops the camera inside the column.
        let bad = RayCastConfig { eye_height_m: -5.0, ..cfg };
        assert!(matches!(
            render_panorama(&grid, &bad),
            Err(GeodepthError::DegenerateOrigin(_))
        ));
    }

    #[test]
    fn wall_depth_is_within_one_step() {
        // 10 m wall, one pixel thick, 20 m north of the camera.
        let (w, h) = (64, 64);
        let cy = h / 2;
        let mut values = vec![0.0; w * h];
        let wall_row = cy - 20;
        for col in 0..w {
            values[wall_row * w + col] = 10.0;
        }
        let map = HeightMap::new(w, h, 1.0, values).unwrap();
        let grid = voxelize(&map, 1.0).unwrap();
        let cfg = RayCastConfig::defaults_for(&grid);
        let d = heightfield_depth_at(&grid, 0.0, 0.0, &cfg).unwrap();
        assert!((d - 20.0).abs() <= cfg.step_m, "wall at 20 m reported {d}");
    }

    #[test]
    fn config_invariants_are_validated() {
        let grid = voxelize(&flat(8, 8), 1.0).unwrap();
        let good = RayCastConfig::defaults_for(&grid);
        assert!(good.validate().is_ok());
        assert!(RayCastConfig { step_m: 0.0, ..good }.validate().is_err());
        assert!(RayCastConfig { max_range_m: 0.1, ..good }.validate().is_err());
        assert!(RayCastConfig { pano_width: 100, pano_height: 49, ..good }.validate().is_err());
    }
}
