//! Raster data model shared by the whole pipeline: height maps, depth
//! panoramas, perspective depth maps, validity masks, and the camera
//! geocalibration that anchors every projection.
//!
//! Values are held as `f64` in memory; the on-disk format is 32-bit (see
//! [`crate::io`]), so anything loaded from a file round-trips bit-exactly.
//! Depth rasters use a single sentinel, [`SENTINEL`] = -1, for rays that hit
//! nothing; every other value is a strictly positive metric depth. `NaN` is
//! rejected at every boundary so downstream means are always well-defined.

use crate::error::{GeodepthError, Result};
use crate::voxel::DEFAULT_EYE_HEIGHT_M;

/// Marker for non-intersecting rays in depth rasters.
pub const SENTINEL: f64 = -1.0;

/// True for a metric depth value, false for the sentinel.
pub fn is_finite_depth(v: f64) -> bool {
    v > 0.0
}

/// Common read access for 2-D rasters with `f64` samples, row-major storage.
pub trait Raster2D: Sized {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn values(&self) -> &[f64];

    /// Same raster metadata with replaced sample values.
    fn with_values(&self, values: Vec<f64>) -> Result<Self>;

    fn at(&self, x: usize, y: usize) -> f64 {
        self.values()[y * self.width() + x]
    }

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(GeodepthError::Data(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(GeodepthError::Data(format!(
            "raster payload has {len} values, expected {width}x{height} = {}",
            width * height
        )));
    }
    Ok(())
}

/// Georeferenced grid of terrain-plus-structure elevations in meters.
///
/// The grid is centered at the query camera's geolocation: the camera sits at
/// the center of pixel `(width / 2, height / 2)`. `gsd` is the ground sample
/// distance, the horizontal extent of one pixel in meters (uniform in x and
/// y). Row 0 is the northern edge and rows increase southward; column 0 is
/// the western edge and columns increase eastward.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightMap {
    width: usize,
    height: usize,
    gsd: f64,
    values: Vec<f64>,
}

impl HeightMap {
    pub fn new(width: usize, height: usize, gsd: f64, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if !gsd.is_finite() || gsd <= 0.0 {
            return Err(GeodepthError::Data(format!("gsd must be positive, got {gsd}")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(GeodepthError::Data(format!(
                "height map contains a non-finite value ({bad})"
            )));
        }
        Ok(HeightMap { width, height, gsd, values })
    }

    pub fn gsd(&self) -> f64 {
        self.gsd
    }

    /// Raster indices of the pixel the camera stands on.
    pub fn center_pixel(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Raster2D for HeightMap {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        HeightMap::new(self.width, self.height, self.gsd, values)
    }
}

/// Shift a height map so its minimum value is exactly zero.
///
/// The output is `input - min(input)` elementwise; shape and ground sample
/// distance are unchanged. Idempotent and order-preserving.
pub fn normalize_height(h: &HeightMap) -> Result<HeightMap> {
    let min = h.min_value();
    if !min.is_finite() {
        return Err(GeodepthError::Data(
            "height map has no finite values to normalize".into(),
        ));
    }
    let values = h.values().iter().map(|v| v - min).collect();
    h.with_values(values)
}

fn check_depth_values(values: &[f64]) -> Result<()> {
    for &v in values {
        if !v.is_finite() {
            return Err(GeodepthError::Data(format!(
                "depth raster contains a non-finite value ({v})"
            )));
        }
        if v <= 0.0 && v != SENTINEL {
            return Err(GeodepthError::Data(format!(
                "depth raster contains {v}; values must be positive or exactly {SENTINEL}"
            )));
        }
    }
    Ok(())
}

/// North-aligned equirectangular raster of metric ray depths.
///
/// Column 0 corresponds to azimuth 0 (true north) and azimuth increases
/// clockwise with column index; row 0 corresponds to elevation +90 (zenith)
/// and the bottom row to -90. Every value is either a strictly positive
/// depth in meters or exactly [`SENTINEL`].
#[derive(Clone, Debug, PartialEq)]
pub struct DepthPanorama {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthPanorama {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        check_depth_values(&values)?;
        Ok(DepthPanorama { width, height, values })
    }

    /// Fraction of pixels holding a finite depth.
    pub fn hit_fraction(&self) -> f64 {
        let hits = self.values.iter().filter(|&&v| is_finite_depth(v)).count();
        hits as f64 / self.values.len() as f64
    }

    /// Min and max over finite depths, if any pixel hit.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for &v in &self.values {
            if is_finite_depth(v) {
                range = Some(match range {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        range
    }
}

impl Raster2D for DepthPanorama {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        DepthPanorama::new(self.width, self.height, values)
    }
}

/// Perspective depth image, optionally carrying the geocalibration it was
/// rendered under. Same value domain as [`DepthPanorama`]. Loaded query
/// images have no calibration attached; that is what orientation
/// registration recovers.
#[derive(Clone, Debug, PartialEq)]
pub struct PerspectiveDepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    calib: Option<Geocalibration>,
}

impl PerspectiveDepthMap {
    pub fn new(
        width: usize,
        height: usize,
        values: Vec<f64>,
        calib: Option<Geocalibration>,
    ) -> Result<Self> {
        check_dims(width, height, values.len())?;
        check_depth_values(&values)?;
        Ok(PerspectiveDepthMap { width, height, values, calib })
    }

    pub fn calib(&self) -> Option<&Geocalibration> {
        self.calib.as_ref()
    }
}

impl Raster2D for PerspectiveDepthMap {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        PerspectiveDepthMap::new(self.width, self.height, values, self.calib.clone())
    }
}

/// Boolean mask marking pixels that participate in losses and metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidityMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl ValidityMask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        check_dims(width, height, flags.len())?;
        Ok(ValidityMask { width, height, flags })
    }

    /// All-true mask.
    pub fn all(width: usize, height: usize) -> Result<Self> {
        ValidityMask::new(width, height, vec![true; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn matches<R: Raster2D>(&self, raster: &R) -> bool {
        self.width == raster.width() && self.height == raster.height()
    }
}

/// Camera pose and optics anchoring all projections.
///
/// Yaw is degrees clockwise from north in `[0, 360)` (stored modulo 360),
/// pitch degrees above the horizon in `[-90, 90]`, roll degrees in
/// `[-180, 180)` (wrapped), `fov` the horizontal field of view in `(0, 180)`,
/// and `eye_height` meters above the terrain at the grid center. See
/// [`crate::geom`] for the rotation-composition convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Geocalibration {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub fov_deg: f64,
    pub eye_height_m: f64,
}

impl Geocalibration {
    pub fn new(
        yaw_deg: f64,
        pitch_deg: f64,
        roll_deg: f64,
        fov_deg: f64,
        eye_height_m: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("yaw", yaw_deg),
            ("pitch", pitch_deg),
            ("roll", roll_deg),
            ("fov", fov_deg),
            ("eye_height", eye_height_m),
        ] {
            if !v.is_finite() {
                return Err(GeodepthError::Contract(format!(
                    "geocalibration {name} must be finite, got {v}"
                )));
            }
        }
        if !(-90.0..=90.0).contains(&pitch_deg) {
            return Err(GeodepthError::Contract(format!(
                "pitch must lie in [-90, 90], got {pitch_deg}"
            )));
        }
        if fov_deg <= 0.0 || fov_deg >= 180.0 {
            return Err(GeodepthError::Contract(format!(
                "fov must lie in (0, 180), got {fov_deg}"
            )));
        }
        let yaw = yaw_deg.rem_euclid(360.0);
        let yaw = if yaw == 360.0 { 0.0 } else { yaw };
        let mut roll = roll_deg.rem_euclid(360.0);
        if roll >= 180.0 {
            roll -= 360.0;
        }
        Ok(Geocalibration {
            yaw_deg: yaw,
            pitch_deg,
            roll_deg: roll,
            fov_deg,
            eye_height_m,
        })
    }

    /// Same pose with a different yaw (kept modulo 360).
    pub fn with_yaw(&self, yaw_deg: f64) -> Self {
        let yaw = yaw_deg.rem_euclid(360.0);
        Geocalibration { yaw_deg: if yaw == 360.0 { 0.0 } else { yaw }, ..self.clone() }
    }
}

impl Default for Geocalibration {
    /// North-facing level camera, 90 degree field of view, street-level eye
    /// height.
    fn default() -> Self {
        Geocalibration {
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            roll_deg: 0.0,
            fov_deg: 90.0,
            eye_height_m: DEFAULT_EYE_HEIGHT_M,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_shifts_by_minimum() {
        let h = HeightMap::new(3, 1, 1.0, vec![5.0, 7.0, 6.0]).unwrap();
        let n = normalize_height(&h).unwrap();
        assert_eq!(n.values(), &[0.0, 2.0, 1.0]);
        assert_eq!(n.gsd(), 1.0);
    }

    #[test]
    fn normalize_is_idempotent_on_min_zero_grids() {
        let h = HeightMap::new(2, 2, 0.5, vec![0.0, 3.0, 1.0, 2.0]).unwrap();
        let n = normalize_height(&h).unwrap();
        assert_eq!(n.values(), h.values());
    }

    #[test]
    fn normalize_preserves_value_order() {
        use rand::Rng;
        let mut rng = crate::testkit::seeded_rng(31);
        for _ in 0..20 {
            let values: Vec<f64> = (0..48).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let h = HeightMap::new(8, 6, 1.0, values.clone()).unwrap();
            let n = normalize_height(&h).unwrap();
            assert_eq!(n.min_value(), 0.0);
            let argsort = |v: &[f64]| {
                let mut idx: Vec<usize> = (0..v.len()).collect();
                idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
                idx
            };
            assert_eq!(argsort(h.values()), argsort(n.values()));
        }
    }

    #[test]
    fn height_map_rejects_nan() {
        let err = HeightMap::new(2, 1, 1.0, vec![0.0, f64::NAN]);
        assert!(matches!(err, Err(GeodepthError::Data(_))));
    }

    #[test]
    fn depth_values_must_be_positive_or_sentinel() {
        assert!(DepthPanorama::new(2, 1, vec![3.0, SENTINEL]).is_ok());
        assert!(matches!(
            DepthPanorama::new(2, 1, vec![3.0, 0.0]),
            Err(GeodepthError::Data(_))
        ));
        assert!(matches!(
            DepthPanorama::new(2, 1, vec![3.0, -0.5]),
            Err(GeodepthError::Data(_))
        ));
    }

    #[test]
    fn yaw_wraps_modulo_360() {
        let c = Geocalibration::new(370.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        assert!((c.yaw_deg - 10.0).abs() < 1e-12);
        let c = Geocalibration::new(-90.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        assert!((c.yaw_deg - 270.0).abs() < 1e-12);
        let c = Geocalibration::new(360.0, 0.0, 0.0, 90.0, 2.5).unwrap();
        assert_eq!(c.yaw_deg, 0.0);
    }

    #[test]
    fn pitch_and_fov_ranges_are_enforced() {
        assert!(Geocalibration::new(0.0, 91.0, 0.0, 90.0, 2.5).is_err());
        assert!(Geocalibration::new(0.0, 0.0, 0.0, 180.0, 2.5).is_err());
        assert!(Geocalibration::new(0.0, 0.0, 0.0, 0.0, 2.5).is_err());
    }

    #[test]
    fn roll_wraps_into_half_open_range() {
        let c = Geocalibration::new(0.0, 0.0, 180.0, 90.0, 2.5).unwrap();
        assert_eq!(c.roll_deg, -180.0);
        let c = Geocalibration::new(0.0, 0.0, -190.0, 90.0, 2.5).unwrap();
        assert!((c.roll_deg - 170.0).abs() < 1e-12);
    }

    #[test]
    fn mask_dimensions_are_checked() {
        let m = ValidityMask::all(4, 2).unwrap();
        let d = DepthPanorama::new(4, 2, vec![1.0; 8]).unwrap();
        assert!(m.matches(&d));
        let other = DepthPanorama::new(2, 4, vec![1.0; 8]).unwrap();
        assert!(!m.matches(&other));
    }
}
