//! Camera orientation recovery: exhaustive grid search of (yaw, pitch)
//! against a synthetic depth panorama.
//!
//! Each grid cell extracts the perspective cutout the panorama would show at
//! that orientation and scores it by mean absolute error against the query
//! over pixels finite in both; the lowest score wins, ties broken by smaller
//! yaw, then smaller pitch. Cells whose valid overlap falls below a minimum
//! fraction of the query are discarded so tiny overlaps cannot win on
//! spuriously low error. Cells are scored independently (and in parallel);
//! the deterministic tie-break makes the result independent of scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeodepthError, Result};
use crate::projection::CutoutSampler;
use crate::raster::{DepthPanorama, Raster2D};

/// Search ranges for the orientation grid. Roll and field of view are held
/// fixed; only yaw and pitch are searched.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchGrid {
    pub yaw_min_deg: f64,
    pub yaw_max_deg: f64,
    pub yaw_step_deg: f64,
    pub pitch_min_deg: f64,
    pub pitch_max_deg: f64,
    pub pitch_step_deg: f64,
    pub roll_deg: f64,
    pub fov_deg: f64,
    /// Minimum fraction of query pixels that must be mutually valid for a
    /// cell to be scored.
    pub min_overlap_frac: f64,
    /// Number of best cells reported in `ranked_alternatives`.
    pub top_k: usize,
}

impl Default for SearchGrid {
    /// Full-circle yaw at one-degree steps, pitch -10..10 degrees, level
    /// roll, 90 degree field of view.
    fn default() -> Self {
        SearchGrid {
            yaw_min_deg: 0.0,
            yaw_max_deg: 359.0,
            yaw_step_deg: 1.0,
            pitch_min_deg: -10.0,
            pitch_max_deg: 10.0,
            pitch_step_deg: 1.0,
            roll_deg: 0.0,
            fov_deg: 90.0,
            min_overlap_frac: 0.25,
            top_k: 5,
        }
    }
}

impl SearchGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("yaw_min", self.yaw_min_deg),
            ("yaw_max", self.yaw_max_deg),
            ("pitch_min", self.pitch_min_deg),
            ("pitch_max", self.pitch_max_deg),
            ("roll", self.roll_deg),
        ] {
            if !v.is_finite() {
                return Err(GeodepthError::Contract(format!("{name} must be finite, got {v}")));
            }
        }
        if !self.yaw_step_deg.is_finite()
            || !self.pitch_step_deg.is_finite()
            || self.yaw_step_deg <= 0.0
            || self.pitch_step_deg <= 0.0
        {
            return Err(GeodepthError::Contract("search steps must be positive".into()));
        }
        if self.yaw_max_deg < self.yaw_min_deg || self.pitch_max_deg < self.pitch_min_deg {
            return Err(GeodepthError::Contract("search ranges must be nonempty".into()));
        }
        if !self.fov_deg.is_finite() || self.fov_deg <= 0.0 || self.fov_deg >= 180.0 {
            return Err(GeodepthError::Contract(format!(
                "fov must lie in (0, 180), got {}",
                self.fov_deg
            )));
        }
        if !(0.0..=1.0).contains(&self.min_overlap_frac) {
            return Err(GeodepthError::Contract(format!(
                "min_overlap_frac must lie in [0, 1], got {}",
                self.min_overlap_frac
            )));
        }
        if self.top_k == 0 {
            return Err(GeodepthError::Contract("top_k must be at least 1".into()));
        }
        Ok(())
    }

    fn axis_values(min: f64, max: f64, step: f64) -> Vec<f64> {
        // Integer stepping with a tolerance so e.g. 0..359 by 1 yields 360
        // values despite floating-point accumulation.
        let n = ((max - min) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| min + i as f64 * step).collect()
    }

    pub fn yaw_values(&self) -> Vec<f64> {
        Self::axis_values(self.yaw_min_deg, self.yaw_max_deg, self.yaw_step_deg)
    }

    pub fn pitch_values(&self) -> Vec<f64> {
        Self::axis_values(self.pitch_min_deg, self.pitch_max_deg, self.pitch_step_deg)
    }
}

/// One scored orientation hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoseScore {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    /// Mean absolute depth error in meters over the mutually valid pixels.
    pub score: f64,
    pub n_valid: usize,
}

/// Outcome of the grid search: the argmin cell and the `top_k` best cells
/// (winner first) in (score, yaw, pitch) order.
#[derive(Clone, Debug, Serialize)]
pub struct RegistrationResult {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub score: f64,
    pub n_valid: usize,
    pub ranked_alternatives: Vec<PoseScore>,
}

fn better(a: &PoseScore, b: &PoseScore) -> std::cmp::Ordering {
    a.score
        .total_cmp(&b.score)
        .then(a.yaw_deg.total_cmp(&b.yaw_deg))
        .then(a.pitch_deg.total_cmp(&b.pitch_deg))
}

/// Recover the query camera's orientation against a north-aligned panorama.
pub fn register_orientation<Q: Raster2D>(
    query: &Q,
    pano: &DepthPanorama,
    grid: &SearchGrid,
) -> Result<RegistrationResult> {
    grid.validate()?;
    let (qw, qh) = (query.width(), query.height());
    if qw == 0 || qh == 0 {
        return Err(GeodepthError::Contract("query must be non-empty".into()));
    }
    let total = qw * qh;
    let n_min = ((grid.min_overlap_frac * total as f64).ceil() as usize).max(1);
    let yaws = grid.yaw_values();
    let pitches = grid.pitch_values();
    let qvals = query.values();

    let mut cells: Vec<PoseScore> = pitches
        .par_iter()
        .map(|&pitch| -> Result<Vec<PoseScore>> {
            // One sampler per pitch; yaw enters as a pure azimuth shift, so
            // every yaw cell reuses the same precomputed projection and is
            // bit-identical to a fresh cutout extraction at that pose.
            let sampler = CutoutSampler::new(
                pitch,
                grid.roll_deg,
                grid.fov_deg,
                qw,
                qh,
                pano.width(),
                pano.height(),
            )?;
            let mut row = Vec::with_capacity(yaws.len());
            for &yaw in &yaws {
                let (score, n_valid) = sampler.score_against(pano, yaw, qvals)?;
                if n_valid >= n_min {
                    row.push(PoseScore { yaw_deg: yaw, pitch_deg: pitch, score, n_valid });
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    if cells.is_empty() {
        return Err(GeodepthError::Registration(format!(
            "no grid cell reaches the minimum overlap of {n_min} pixels \
             ({} of the query)",
            grid.min_overlap_frac
        )));
    }

    cells.sort_by(better);
    cells.truncate(grid.top_k);
    let best = cells[0];
    Ok(RegistrationResult {
        yaw_deg: best.yaw_deg,
        pitch_deg: best.pitch_deg,
        score: best.score,
        n_valid: best.n_valid,
        ranked_alternatives: cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{extract_cutout, rotate_columns};
    use crate::raster::Geocalibration;
    use crate::testkit::{generate_scene, SceneSpec};
    use crate::voxel::{render_panorama, voxelize, RayCastConfig};

    fn structured_pano() -> DepthPanorama {
        let h = generate_scene(&SceneSpec::box_field(64, 64, 1.0, 5)).unwrap();
        let grid = voxelize(&h, 1.0).unwrap();
        let cfg = RayCastConfig {
            pano_width: 256,
            pano_height: 128,
            ..RayCastConfig::defaults_for(&grid)
        };
        render_panorama(&grid, &cfg).unwrap()
    }

    fn small_grid() -> SearchGrid {
        SearchGrid {
            yaw_step_deg: 1.0,
            pitch_min_deg: -2.0,
            pitch_max_deg: 2.0,
            ..SearchGrid::default()
        }
    }

    #[test]
    fn default_grid_has_the_documented_shape() {
        let g = SearchGrid::default();
        assert_eq!(g.yaw_values().len(), 360);
        assert_eq!(g.pitch_values().len(), 21);
    }

    #[test]
    fn self_registration_scores_exactly_zero() {
        let pano = structured_pano();
        let calib = Geocalibration::new(37.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        let query = extract_cutout(&pano, &calib, 48, 48).unwrap();
        let result = register_orientation(&query, &pano, &small_grid()).unwrap();
        assert_eq!(result.yaw_deg, 37.0);
        assert_eq!(result.pitch_deg, 0.0);
        assert_eq!(result.score, 0.0);
        assert!(result.n_valid > 0);
        assert_eq!(result.ranked_alternatives[0].score, 0.0);
    }

    #[test]
    fn constant_panorama_ties_break_to_grid_minimum() {
        let pano = DepthPanorama::new(128, 64, vec![25.0; 128 * 64]).unwrap();
        let calib = Geocalibration::new(200.0, 1.0, 0.0, 90.0, 2.5).unwrap();
        let query = extract_cutout(&pano, &calib, 32, 32).unwrap();
        let grid = small_grid();
        let result = register_orientation(&query, &pano, &grid).unwrap();
        assert_eq!(result.yaw_deg, grid.yaw_min_deg);
        assert_eq!(result.pitch_deg, grid.pitch_min_deg);
        assert_eq!(result.score, 0.0);
    }

    #[test]
    fn search_matches_an_independent_exhaustive_loop() {
        let pano = structured_pano();
        let calib = Geocalibration::new(101.0, 1.0, 0.0, 90.0, 2.5).unwrap();
        let query = extract_cutout(&pano, &calib, 24, 24).unwrap();
        let grid = SearchGrid {
            yaw_min_deg: 80.0,
            yaw_max_deg: 120.0,
            yaw_step_deg: 1.0,
            pitch_min_deg: -2.0,
            pitch_max_deg: 2.0,
            pitch_step_deg: 1.0,
            ..SearchGrid::default()
        };
        let result = register_orientation(&query, &pano, &grid).unwrap();

        // Independent loop over the same grid using full cutout extraction.
        let mut best: Option<PoseScore> = None;
        for &pitch in &grid.pitch_values() {
            for &yaw in &grid.yaw_values() {
                let c = Geocalibration::new(yaw, pitch, grid.roll_deg, grid.fov_deg, 2.5).unwrap();
                let cut = extract_cutout(&pano, &c, 24, 24).unwrap();
                let mut sum = 0.0;
                let mut n = 0usize;
                for (a, b) in cut.values().iter().zip(query.values()) {
                    if *a > 0.0 && *b > 0.0 {
                        sum += (a - b).abs();
                        n += 1;
                    }
                }
                if n * 4 < 24 * 24 {
                    continue;
                }
                let cand = PoseScore { yaw_deg: yaw, pitch_deg: pitch, score: sum / n as f64, n_valid: n };
                best = Some(match best {
                    None => cand,
                    Some(b) if better(&cand, &b).is_lt() => cand,
                    Some(b) => b,
                });
            }
        }
        let best = best.unwrap();
        assert_eq!(result.yaw_deg, best.yaw_deg);
        assert_eq!(result.pitch_deg, best.pitch_deg);
        assert_eq!(result.score, best.score);
    }

    #[test]
    fn yaw_shift_equivariance_for_whole_columns() {
        let pano = structured_pano();
        let calib = Geocalibration::new(90.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        let query = extract_cutout(&pano, &calib, 32, 32).unwrap();
        // 256-column panorama: one column is 1.40625 degrees; shift by 32
        // columns = 45 degrees exactly.
        let delta = 45.0;
        let rotated = rotate_columns(&pano, delta);
        let grid = small_grid();
        let base = register_orientation(&query, &pano, &grid).unwrap();
        let shifted = register_orientation(&query, &rotated, &grid).unwrap();
        assert_eq!(base.yaw_deg, 90.0);
        assert_eq!(shifted.yaw_deg, (base.yaw_deg - delta).rem_euclid(360.0));
        assert_eq!(shifted.score, base.score);
    }

    #[test]
    fn no_overlap_is_a_registration_error() {
        let pano = DepthPanorama::new(64, 32, vec![crate::raster::SENTINEL; 64 * 32]).unwrap();
        let query =
            crate::raster::PerspectiveDepthMap::new(8, 8, vec![10.0; 64], None).unwrap();
        let err = register_orientation(&query, &pano, &small_grid()).unwrap_err();
        assert!(matches!(err, GeodepthError::Registration(_)));
    }
}
