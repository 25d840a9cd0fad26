//! World-frame conventions and the small amount of 3-D math the pipeline
//! needs. Every module that touches directions goes through these helpers so
//! the conventions are defined exactly once.
//!
//! # World frame
//!
//! Right at the camera, `+x` points north, `+y` points east, `+z` points up.
//! Azimuth is measured in degrees clockwise from north (due east is 90),
//! elevation in degrees above the horizon. A direction is therefore
//!
//! ```text
//! d = (cos el * cos az, cos el * sin az, sin el)
//! ```
//!
//! # Panorama convention
//!
//! An equirectangular panorama of size `W x H` maps azimuth linearly to
//! columns (column 0 starts at azimuth 0 = north, increasing clockwise) and
//! elevation linearly to rows (row 0 starts at +90 = zenith, the bottom row
//! ends at -90). The center of pixel `(col, row)` looks along
//!
//! ```text
//! az = (col + 0.5) * 360 / W      el = 90 - (row + 0.5) * 180 / H
//! ```
//!
//! # Camera orientation
//!
//! The camera frame is (forward, right, up), initially aligned with
//! (north, east, up). Orientation is composed as roll about the initial
//! forward axis, then pitch about the initial right axis, then yaw about the
//! initial up axis (fixed reference axes; equivalently intrinsic
//! yaw -> pitch -> roll). Under this composition yaw is always the compass
//! azimuth of the viewing direction, pitch its elevation, and roll turns the
//! image about the viewing axis (positive roll tilts the camera's up vector
//! toward its right vector).

pub type Vec3 = [f64; 3];

/// Unit direction for an (azimuth, elevation) pair, in degrees.
pub fn ray_direction(azimuth_deg: f64, elevation_deg: f64) -> Vec3 {
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    let (ce, se) = (el.cos(), el.sin());
    let (ca, sa) = (az.cos(), az.sin());
    [ce * ca, ce * sa, se]
}

/// Azimuth in `[0, 360)` and elevation in `[-90, 90]`, both degrees, for a
/// direction vector. At the exact poles (zero horizontal component) the
/// azimuth is fixed to 0.
pub fn azimuth_elevation(dir: Vec3) -> (f64, f64) {
    let [x, y, z] = dir;
    let az = if x == 0.0 && y == 0.0 {
        0.0
    } else {
        let a = y.atan2(x).to_degrees();
        let a = if a < 0.0 { a + 360.0 } else { a };
        if a >= 360.0 {
            0.0
        } else {
            a
        }
    };
    let norm = (x * x + y * y + z * z).sqrt();
    let el = (z / norm).clamp(-1.0, 1.0).asin().to_degrees();
    (az, el)
}

/// Viewing angles of the center of panorama pixel `(col, row)`.
pub fn pano_pixel_center_angles(col: usize, row: usize, pano_w: usize, pano_h: usize) -> (f64, f64) {
    let az = (col as f64 + 0.5) * 360.0 / pano_w as f64;
    let el = 90.0 - (row as f64 + 0.5) * 180.0 / pano_h as f64;
    (az, el)
}

/// Viewing angles for continuous panorama coordinates, the inverse of
/// `direction_to_pano_coords`. `col = c + 0.5` recovers the pixel-center
/// angles of pixel `c`.
pub fn pano_coords_to_angles(col: f64, row: f64, pano_w: usize, pano_h: usize) -> (f64, f64) {
    let az = col * 360.0 / pano_w as f64;
    let el = 90.0 - row * 180.0 / pano_h as f64;
    (az, el)
}

/// Row-major 3x3 matrix; `apply` computes `M v`.
#[derive(Clone, Copy, Debug)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(out)
    }
}

/// Camera-to-world rotation for the given orientation angles (degrees).
///
/// Camera coordinates are (forward, right, up). The columns of the result
/// are the camera basis vectors expressed in the world frame.
pub fn camera_rotation(yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Mat3 {
    let (cy, sy) = {
        let a = yaw_deg.to_radians();
        (a.cos(), a.sin())
    };
    let (cp, sp) = {
        let a = pitch_deg.to_radians();
        (a.cos(), a.sin())
    };
    let (cr, sr) = {
        let a = roll_deg.to_radians();
        (a.cos(), a.sin())
    };
    // Yaw about the reference up axis; forward(az=yaw), right(az=yaw+90).
    let yaw = Mat3([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]]);
    // Pitch about the reference right axis; positive tilts forward up.
    let pitch = Mat3([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]]);
    // Roll about the reference forward axis; positive tilts up toward right.
    let roll = Mat3([[1.0, 0.0, 0.0], [0.0, cr, sr], [0.0, -sr, cr]]);
    yaw.mul(&pitch).mul(&roll)
}

pub fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: Vec3, b: Vec3, tol: f64) {
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= tol, "{a:?} vs {b:?} at {i}");
        }
    }

    #[test]
    fn cardinal_directions() {
        assert_close(ray_direction(0.0, 0.0), [1.0, 0.0, 0.0], 1e-15);
        assert_close(ray_direction(90.0, 0.0), [0.0, 1.0, 0.0], 1e-15);
        assert_close(ray_direction(180.0, 0.0), [-1.0, 0.0, 0.0], 1e-15);
        assert_close(ray_direction(270.0, 0.0), [0.0, -1.0, 0.0], 1e-15);
        assert_close(ray_direction(0.0, 90.0), [0.0, 0.0, 1.0], 1e-15);
        assert_close(ray_direction(0.0, -90.0), [0.0, 0.0, -1.0], 1e-15);
    }

    #[test]
    fn azimuth_elevation_round_trip() {
        for &az in &[0.0, 13.5, 90.0, 179.0, 233.25, 359.5] {
            for &el in &[-89.0, -45.0, 0.0, 30.0, 88.5] {
                let (a, e) = azimuth_elevation(ray_direction(az, el));
                assert!((a - az).abs() < 1e-10, "az {az} -> {a}");
                assert!((e - el).abs() < 1e-10, "el {el} -> {e}");
            }
        }
    }

    #[test]
    fn poles_have_zero_azimuth() {
        assert_eq!(azimuth_elevation([0.0, 0.0, 1.0]).0, 0.0);
        assert_eq!(azimuth_elevation([0.0, 0.0, -1.0]).0, 0.0);
    }

    #[test]
    fn yaw_is_compass_heading_under_pitch() {
        // Forward direction of a yawed-and-pitched camera keeps azimuth = yaw
        // and elevation = pitch.
        let r = camera_rotation(90.0, 45.0, 0.0);
        let fwd = r.apply([1.0, 0.0, 0.0]);
        let (az, el) = azimuth_elevation(fwd);
        assert!((az - 90.0).abs() < 1e-10);
        assert!((el - 45.0).abs() < 1e-10);

        let r = camera_rotation(300.0, -30.0, 25.0);
        let fwd = r.apply([1.0, 0.0, 0.0]);
        let (az, el) = azimuth_elevation(fwd);
        assert!((az - 300.0).abs() < 1e-9);
        assert!((el + 30.0).abs() < 1e-9);
    }

    #[test]
    fn roll_tilts_up_toward_right() {
        let r = camera_rotation(0.0, 0.0, 30.0);
        let up = r.apply([0.0, 0.0, 1.0]);
        // Up vector leans east (the camera's right) for positive roll.
        assert!(up[1] > 0.0);
        assert!((up[2] - 30f64.to_radians().cos()).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = camera_rotation(123.0, -17.0, 42.0);
        let f = r.apply([1.0, 0.0, 0.0]);
        let ri = r.apply([0.0, 1.0, 0.0]);
        let u = r.apply([0.0, 0.0, 1.0]);
        for v in [f, ri, u] {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
        let dot = |a: Vec3, b: Vec3| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert!(dot(f, ri).abs() < 1e-12);
        assert!(dot(f, u).abs() < 1e-12);
        assert!(dot(ri, u).abs() < 1e-12);
    }
}
