//! Bit-exact raster file I/O.
//!
//! Rasters travel as PFM (portable float map), grayscale `Pf` variant: a
//! three-line ASCII header (`Pf`, `<width> <height>`, `<scale>` where a
//! negative scale marks little-endian payloads), followed by
//! `width * height` 4-byte IEEE floats in bottom-to-top row order. Files are
//! always written little-endian; both endiannesses are accepted on read.
//!
//! Height rasters additionally require a georeferencing sidecar
//! `<raster>.geo.json` holding the ground sample distance and optional
//! rendering defaults:
//!
//! ```json
//! { "gsd_m": 1.0, "eye_height_m": 2.5, "vertical_voxel_m": 1.0 }
//! ```
//!
//! Values are promoted to `f64` in memory (exactly) and quantized back to
//! 32-bit on write, so `load(save(r))` is bit-identical for any raster whose
//! values came from a file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GeodepthError, Result};
use crate::raster::{DepthPanorama, HeightMap, Raster2D};

/// Georeferencing sidecar for height rasters. Optional fields default to the
/// renderer's standard values when absent (eye height 2.5 m, vertical voxel
/// size 1 m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoSidecar {
    pub gsd_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eye_height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical_voxel_m: Option<f64>,
}

impl GeoSidecar {
    pub fn new(gsd_m: f64) -> Self {
        GeoSidecar { gsd_m, eye_height_m: None, vertical_voxel_m: None }
    }
}

/// What a raster file is expected to contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RasterKind {
    Height,
    Depth,
}

/// A loaded raster together with its metadata.
#[derive(Clone, Debug)]
pub enum Raster {
    Height { map: HeightMap, sidecar: GeoSidecar },
    Depth(DepthPanorama),
}

/// Path of the georeferencing sidecar for a raster path.
pub fn sidecar_path(raster_path: &Path) -> PathBuf {
    let mut s = raster_path.as_os_str().to_os_string();
    s.push(".geo.json");
    PathBuf::from(s)
}

/// Load a raster of the expected kind. Height rasters require their sidecar;
/// depth rasters are validated against the positive-or-sentinel value domain.
pub fn load_raster(path: &Path, kind: RasterKind) -> Result<Raster> {
    match kind {
        RasterKind::Height => {
            let (map, sidecar) = load_height_map(path)?;
            Ok(Raster::Height { map, sidecar })
        }
        RasterKind::Depth => Ok(Raster::Depth(load_depth(path)?)),
    }
}

/// Save a raster, writing the sidecar alongside height rasters.
pub fn save_raster(raster: &Raster, path: &Path) -> Result<()> {
    match raster {
        Raster::Height { map, sidecar } => save_height_map(map, sidecar, path),
        Raster::Depth(d) => save_depth(d, path),
    }
}

pub fn load_height_map(path: &Path) -> Result<(HeightMap, GeoSidecar)> {
    let (width, height, values) = read_pfm(path)?;
    let sc_path = sidecar_path(path);
    let text = fs::read_to_string(&sc_path).map_err(|e| {
        GeodepthError::metadata(
            path,
            format!("height raster needs a georeferencing sidecar at {}: {e}", sc_path.display()),
        )
    })?;
    let sidecar: GeoSidecar = serde_json::from_str(&text)
        .map_err(|e| GeodepthError::metadata(&sc_path, format!("invalid sidecar JSON: {e}")))?;
    if !sidecar.gsd_m.is_finite() || sidecar.gsd_m <= 0.0 {
        return Err(GeodepthError::metadata(
            &sc_path,
            format!("gsd_m must be positive, got {}", sidecar.gsd_m),
        ));
    }
    let map = HeightMap::new(width, height, sidecar.gsd_m, values)?;
    Ok((map, sidecar))
}

pub fn load_depth(path: &Path) -> Result<DepthPanorama> {
    let (width, height, values) = read_pfm(path)?;
    DepthPanorama::new(width, height, values)
}

pub fn save_height_map(map: &HeightMap, sidecar: &GeoSidecar, path: &Path) -> Result<()> {
    if sidecar.gsd_m != map.gsd() {
        return Err(GeodepthError::Contract(format!(
            "sidecar gsd {} disagrees with height map gsd {}",
            sidecar.gsd_m,
            map.gsd()
        )));
    }
    write_pfm(path, map.width(), map.height(), map.values())?;
    let sc_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(sidecar)
        .map_err(|e| GeodepthError::Data(format!("sidecar serialization failed: {e}")))?;
    fs::write(&sc_path, text).map_err(|e| GeodepthError::io(&sc_path, e))?;
    Ok(())
}

/// Save any depth-valued raster (panorama or perspective cutout) as PFM.
pub fn save_depth<R: Raster2D>(raster: &R, path: &Path) -> Result<()> {
    write_pfm(path, raster.width(), raster.height(), raster.values())
}

fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| GeodepthError::io(path, e))?;
    let mut pos = 0usize;

    let mut next_token = |bytes: &[u8]| -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(GeodepthError::format(path, "truncated header"));
        }
        String::from_utf8(bytes[start..pos].to_vec())
            .map_err(|_| GeodepthError::format(path, "non-ASCII header token"))
    };

    let magic = next_token(&bytes)?;
    if magic == "PF" {
        return Err(GeodepthError::format(path, "color PFM (PF) is not supported, expected Pf"));
    }
    if magic != "Pf" {
        return Err(GeodepthError::format(path, format!("bad magic {magic:?}, expected \"Pf\"")));
    }
    let width: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| GeodepthError::format(path, "width is not an integer"))?;
    let height: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| GeodepthError::format(path, "height is not an integer"))?;
    let scale: f64 = next_token(&bytes)?
        .parse()
        .map_err(|_| GeodepthError::format(path, "scale is not a number"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(GeodepthError::format(path, format!("scale must be nonzero, got {scale}")));
    }
    if width == 0 || height == 0 {
        return Err(GeodepthError::format(path, format!("bad dimensions {width}x{height}")));
    }
    let little_endian = scale < 0.0;

    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(GeodepthError::format(path, "missing separator before payload"));
    }
    pos += 1;

    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| GeodepthError::format(path, "dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() != expected {
        return Err(GeodepthError::format(
            path,
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }

    // PFM stores rows bottom-to-top; flip into row-major top-down order.
    let mut values = vec![0.0f64; width * height];
    for file_row in 0..height {
        let logical_row = height - 1 - file_row;
        for col in 0..width {
            let off = (file_row * width + col) * 4;
            let raw: [u8; 4] = payload[off..off + 4].try_into().unwrap();
            let v = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            if !v.is_finite() {
                return Err(GeodepthError::Data(format!(
                    "{}: non-finite payload value {v} at row {logical_row}, col {col}",
                    path.display()
                )));
            }
            values[logical_row * width + col] = f64::from(v);
        }
    }
    Ok((width, height, values))
}

fn write_pfm(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    debug_assert_eq!(values.len(), width * height);
    let mut out = Vec::with_capacity(32 + values.len() * 4);
    out.extend_from_slice(format!("Pf\n{width} {height}\n-1.0\n").as_bytes());
    for file_row in 0..height {
        let logical_row = height - 1 - file_row;
        for col in 0..width {
            let v = values[logical_row * width + col] as f32;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| GeodepthError::io(path, e))
}
