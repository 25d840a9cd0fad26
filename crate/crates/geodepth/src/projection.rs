//! Perspective cutout extraction from equirectangular depth panoramas, plus
//! the pinhole/panorama coordinate mappings it is built from.
//!
//! The pinhole camera has a horizontal field of view of `fov` degrees, square
//! pixels, and its principal point at the image center; rays pass through
//! pixel centers `(u + 0.5, v + 0.5)`. Orientation follows the convention in
//! [`crate::geom`].
//!
//! Sampling is sentinel-aware bilinear: interpolation never blends the -1
//! non-intersection marker with finite depths. Columns wrap across the
//! 0/360 azimuth seam; rows clamp at the poles.
//!
//! Internally the yaw rotation is applied as an exact azimuth shift in
//! panorama coordinates (mathematically identical to rotating the ray about
//! the up axis). This makes cutouts at yaws that are whole multiples of the
//! panorama's column step bit-identical to column-rotated panoramas sampled
//! at yaw zero, and lets one precomputed sampler serve every yaw during
//! orientation search.

use rayon::prelude::*;

use crate::error::{GeodepthError, Result};
use crate::geom::{self, Vec3};
use crate::raster::{DepthPanorama, Geocalibration, PerspectiveDepthMap, Raster2D, SENTINEL};

/// Unit direction in the world frame (north = +x, east = +y, up = +z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraRay(Vec3);

impl CameraRay {
    /// Normalizes the given vector; rejects zero or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = geom::norm(v);
        if !n.is_finite() || n == 0.0 {
            return Err(GeodepthError::Contract(format!(
                "camera ray must be a nonzero finite vector, got {v:?}"
            )));
        }
        Ok(CameraRay([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn direction(&self) -> Vec3 {
        self.0
    }

    /// Azimuth (degrees clockwise from north, `[0, 360)`) and elevation
    /// (degrees above the horizon) of this ray.
    pub fn azimuth_elevation(&self) -> (f64, f64) {
        geom::azimuth_elevation(self.0)
    }
}

/// Direction of the ray through the center of output pixel `(u, v)` for a
/// pinhole camera under the given geocalibration.
pub fn pixel_to_direction(
    calib: &Geocalibration,
    u: usize,
    v: usize,
    out_w: usize,
    out_h: usize,
) -> CameraRay {
    assert!(u < out_w && v < out_h, "pixel ({u}, {v}) outside {out_w}x{out_h}");
    let f_pix = focal_length_pixels(calib.fov_deg, out_w);
    let right = (u as f64 + 0.5) - out_w as f64 / 2.0;
    let up = out_h as f64 / 2.0 - (v as f64 + 0.5);
    let rot = geom::camera_rotation(calib.yaw_deg, calib.pitch_deg, calib.roll_deg);
    let world = rot.apply([f_pix, right, up]);
    CameraRay::new(world).expect("pinhole ray is nonzero by construction")
}

fn focal_length_pixels(fov_deg: f64, out_w: usize) -> f64 {
    out_w as f64 / 2.0 / (fov_deg / 2.0).to_radians().tan()
}

/// Continuous panorama coordinates of a direction: `col = az / 360 * W`,
/// `row = (90 - el) / 180 * H`. Pixel centers land on half-integer
/// coordinates, the inverse of the render convention. At the exact poles the
/// column is fixed to 0.
pub fn direction_to_pano_coords(dir: &CameraRay, pano_w: usize, pano_h: usize) -> (f64, f64) {
    let (az, el) = dir.azimuth_elevation();
    let col = az / 360.0 * pano_w as f64;
    let row = (90.0 - el) / 180.0 * pano_h as f64;
    (col, row)
}

/// Precomputed cutout sampler for one (pitch, roll, fov, output size,
/// panorama size) combination. The yaw is supplied per sample call, so a
/// single sampler serves arbitrarily many headings against the same panorama
/// geometry; this is what the orientation search iterates.
#[derive(Clone, Debug)]
pub struct CutoutSampler {
    out_w: usize,
    out_h: usize,
    pano_w: usize,
    pano_h: usize,
    /// Per output pixel: column floor/weight at yaw 0 and row floor/weight.
    coords: Vec<PixelCoord>,
}

#[derive(Clone, Copy, Debug)]
struct PixelCoord {
    c0: i64,
    wc: f64,
    r0: i64,
    wr: f64,
}

impl CutoutSampler {
    pub fn new(
        pitch_deg: f64,
        roll_deg: f64,
        fov_deg: f64,
        out_w: usize,
        out_h: usize,
        pano_w: usize,
        pano_h: usize,
    ) -> Result<Self> {
        if out_w == 0 || out_h == 0 {
            return Err(GeodepthError::Contract(format!(
                "cutout dimensions must be positive, got {out_w}x{out_h}"
            )));
        }
        if pano_w == 0 || pano_h == 0 {
            return Err(GeodepthError::Contract("panorama dimensions must be positive".into()));
        }
        // Validates pitch/roll/fov ranges.
        let calib = Geocalibration::new(0.0, pitch_deg, roll_deg, fov_deg, 1.0)?;
        let coords: Vec<PixelCoord> = (0..out_w * out_h)
            .into_par_iter()
            .map(|idx| {
                let (u, v) = (idx % out_w, idx / out_w);
                let ray = pixel_to_direction(&calib, u, v, out_w, out_h);
                let (col, row) = direction_to_pano_coords(&ray, pano_w, pano_h);
                let cf = col - 0.5;
                let rf = row - 0.5;
                let c0 = cf.floor();
                let r0 = rf.floor();
                PixelCoord {
                    c0: c0 as i64,
                    wc: cf - c0,
                    r0: r0 as i64,
                    wr: rf - r0,
                }
            })
            .collect();
        Ok(CutoutSampler { out_w, out_h, pano_w, pano_h, coords })
    }

    pub fn out_width(&self) -> usize {
        self.out_w
    }

    pub fn out_height(&self) -> usize {
        self.out_h
    }

    /// Continuous panorama coordinates sampled for output pixel `(u, v)` at
    /// yaw 0 (before the per-call azimuth shift).
    pub fn base_coords(&self, u: usize, v: usize) -> (f64, f64) {
        let p = self.coords[v * self.out_w + u];
        (p.c0 as f64 + p.wc + 0.5, p.r0 as f64 + p.wr + 0.5)
    }

    fn check_pano(&self, pano: &DepthPanorama) -> Result<()> {
        if pano.width() != self.pano_w || pano.height() != self.pano_h {
            return Err(GeodepthError::Contract(format!(
                "sampler built for a {}x{} panorama, got {}x{}",
                self.pano_w,
                self.pano_h,
                pano.width(),
                pano.height()
            )));
        }
        Ok(())
    }

    /// Integer column offset and fractional remainder of the yaw shift.
    fn yaw_shift(&self, yaw_deg: f64) -> (i64, f64) {
        let delta = yaw_deg.rem_euclid(360.0) * self.pano_w as f64 / 360.0;
        let floor = delta.floor();
        (floor as i64, delta - floor)
    }

    #[inline]
    fn sample_pixel(&self, values: &[f64], coord: &PixelCoord, shift: i64, frac: f64) -> f64 {
        let mut wc = coord.wc + frac;
        let mut c0 = coord.c0 + shift;
        if wc >= 1.0 {
            wc -= 1.0;
            c0 += 1;
        }
        let w = self.pano_w as i64;
        let h = self.pano_h as i64;
        let c0i = c0.rem_euclid(w) as usize;
        let c1i = (c0 + 1).rem_euclid(w) as usize;
        let r0i = coord.r0.clamp(0, h - 1) as usize;
        let r1i = (coord.r0 + 1).clamp(0, h - 1) as usize;
        let wr = coord.wr;

        let v00 = values[r0i * self.pano_w + c0i];
        let v01 = values[r0i * self.pano_w + c1i];
        let v10 = values[r1i * self.pano_w + c0i];
        let v11 = values[r1i * self.pano_w + c1i];

        let f00 = v00 > 0.0;
        let f01 = v01 > 0.0;
        let f10 = v10 > 0.0;
        let f11 = v11 > 0.0;

        if f00 && f01 && f10 && f11 {
            // Lerp form keeps constant fields exact and stays inside the
            // neighbors' value range.
            let top = v00 + (v01 - v00) * wc;
            let bottom = v10 + (v11 - v10) * wc;
            return top + (bottom - top) * wr;
        }
        if !(f00 || f01 || f10 || f11) {
            return SENTINEL;
        }
        // Mixed neighborhood: nearest finite neighbor by bilinear weight,
        // first in (v00, v01, v10, v11) order on ties.
        let candidates = [
            (f00, (1.0 - wc) * (1.0 - wr), v00),
            (f01, wc * (1.0 - wr), v01),
            (f10, (1.0 - wc) * wr, v10),
            (f11, wc * wr, v11),
        ];
        let mut best_w = -1.0;
        let mut best_v = SENTINEL;
        for (finite, weight, value) in candidates {
            if finite && weight > best_w {
                best_w = weight;
                best_v = value;
            }
        }
        best_v
    }

    /// Sample the panorama at the given heading, returning row-major cutout
    /// values.
    pub fn sample_values(&self, pano: &DepthPanorama, yaw_deg: f64) -> Result<Vec<f64>> {
        self.check_pano(pano)?;
        let (shift, frac) = self.yaw_shift(yaw_deg);
        let values = pano.values();
        Ok(self
            .coords
            .iter()
            .map(|c| self.sample_pixel(values, c, shift, frac))
            .collect())
    }

    /// Mean absolute error between a query raster and the cutout this
    /// sampler would produce at `yaw_deg`, over pixels finite in both, along
    /// with the count of such pixels. Avoids materializing the cutout.
    pub fn score_against(
        &self,
        pano: &DepthPanorama,
        yaw_deg: f64,
        query: &[f64],
    ) -> Result<(f64, usize)> {
        self.check_pano(pano)?;
        if query.len() != self.coords.len() {
            return Err(GeodepthError::Contract(format!(
                "query has {} values, sampler expects {}",
                query.len(),
                self.coords.len()
            )));
        }
        let (shift, frac) = self.yaw_shift(yaw_deg);
        let values = pano.values();
        let mut sum = 0.0;
        let mut n = 0usize;
        for (c, &q) in self.coords.iter().zip(query) {
            if q > 0.0 {
                let s = self.sample_pixel(values, c, shift, frac);
                if s > 0.0 {
                    sum += (s - q).abs();
                    n += 1;
                }
            }
        }
        Ok((if n > 0 { sum / n as f64 } else { f64::INFINITY }, n))
    }
}

/// Extract a perspective depth cutout from a panorama under the given
/// geocalibration.
pub fn extract_cutout(
    pano: &DepthPanorama,
    calib: &Geocalibration,
    out_w: usize,
    out_h: usize,
) -> Result<PerspectiveDepthMap> {
    let sampler = CutoutSampler::new(
        calib.pitch_deg,
        calib.roll_deg,
        calib.fov_deg,
        out_w,
        out_h,
        pano.width(),
        pano.height(),
    )?;
    let values = sampler.sample_values(pano, calib.yaw_deg)?;
    PerspectiveDepthMap::new(out_w, out_h, values, Some(calib.clone()))
}

/// Rotate panorama content by whole columns: the result at azimuth `a` shows
/// the input at azimuth `a + delta_deg`. `delta_deg` is quantized to the
/// nearest column.
pub fn rotate_columns(pano: &DepthPanorama, delta_deg: f64) -> DepthPanorama {
    let w = pano.width() as i64;
    let n = (delta_deg * pano.width() as f64 / 360.0).round() as i64;
    let values = pano.values();
    let mut out = Vec::with_capacity(values.len());
    for r in 0..pano.height() {
        for c in 0..pano.width() {
            let src = (c as i64 + n).rem_euclid(w) as usize;
            out.push(values[r * pano.width() + src]);
        }
    }
    DepthPanorama::new(pano.width(), pano.height(), out)
        .expect("column rotation preserves the value domain")
}
