//! Synthetic ground-level depth from overhead height rasters.
//!
//! Given a georeferenced height map centered on a camera location, this crate
//! builds a voxel occupancy grid, ray-casts a metric north-aligned
//! equirectangular depth panorama from the grid center, and extracts
//! perspective depth cutouts under a known camera geocalibration (yaw, pitch,
//! roll, field of view). Around that rendering core it provides the standard
//! monocular-depth evaluation metrics, median-scale calibration, evaluation
//! curves, seeded heading-noise injection, and camera orientation recovery by
//! exhaustive grid search against the synthetic panorama.
//!
//! Every geometric claim is independently checkable: [`testkit`] ships
//! procedural scenes plus deliberately naive reference renderers, and the
//! fast caster must agree with them bit for bit.
//!
//! # Conventions
//!
//! * World frame: `+x` north, `+y` east, `+z` up, origin at the camera.
//!   Azimuth is degrees clockwise from north, elevation degrees above the
//!   horizon (see [`geom`]).
//! * Panoramas are 2:1 equirectangular, north-aligned: column 0 at azimuth 0,
//!   azimuth increasing clockwise; row 0 at +90 elevation (zenith).
//! * Orientation composes as roll, then pitch, then yaw about the fixed
//!   north-aligned reference axes, so yaw is always the compass heading of
//!   the view.
//! * Depth rasters hold strictly positive meters or exactly -1
//!   ([`raster::SENTINEL`]) for rays that hit nothing; `NaN` never enters the
//!   pipeline.
//! * Rasters are PFM on disk (`Pf`, 32-bit floats) with a JSON sidecar for
//!   georeferencing; all geometry runs in `f64`.
//!
//! # Example
//!
//! ```
//! use geodepth::prelude::*;
//!
//! // A procedural scene: boxes scattered around a street-level camera.
//! let heights = generate_scene(&SceneSpec::box_field(64, 64, 1.0, 42))?;
//! let grid = voxelize(&heights, 1.0)?;
//! let cfg = RayCastConfig {
//!     pano_width: 256,
//!     pano_height: 128,
//!     ..RayCastConfig::defaults_for(&grid)
//! };
//! let pano = render_panorama(&grid, &cfg)?;
//!
//! // A 90-degree cutout looking north-east.
//! let calib = Geocalibration::new(45.0, 0.0, 0.0, 90.0, 2.5)?;
//! let cutout = extract_cutout(&pano, &calib, 64, 64)?;
//! assert_eq!(cutout.width(), 64);
//! # Ok::<(), geodepth::GeodepthError>(())
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod losses;
pub mod projection;
pub mod raster;
pub mod register;
pub mod testkit;
pub mod voxel;

pub use error::{GeodepthError, Result};
pub use eval::{
    apply_scale, compute_metrics, error_vs_distance, inject_heading_noise, median_scale_factor,
    rmse_vs_depthcap, scale_scatter, CurvePoint, DepthMetrics, EvalSelection,
};
pub use losses::{combined_loss, masked_mean_loss, pseudo_huber, LossConfig};
pub use projection::{
    direction_to_pano_coords, extract_cutout, pixel_to_direction, rotate_columns, CameraRay,
    CutoutSampler,
};
pub use raster::{
    normalize_height, DepthPanorama, Geocalibration, HeightMap, PerspectiveDepthMap, Raster2D,
    ValidityMask, SENTINEL,
};
pub use register::{register_orientation, RegistrationResult, SearchGrid};
pub use testkit::{generate_scene, oracle_perspective, oracle_render, SceneKind, SceneSpec};
pub use voxel::{heightfield_depth_at, render_panorama, voxelize, RayCastConfig, VoxelGrid};

/// One-stop imports for examples and downstream callers.
pub mod prelude {
    pub use crate::error::{GeodepthError, Result};
    pub use crate::eval::{
        apply_scale, compute_metrics, error_vs_distance, inject_heading_noise,
        median_scale_factor, rmse_vs_depthcap, scale_scatter, CurvePoint, DepthMetrics,
        EvalSelection,
    };
    pub use crate::losses::{combined_loss, masked_mean_loss, pseudo_huber, LossConfig};
    pub use crate::projection::{
        direction_to_pano_coords, extract_cutout, pixel_to_direction, rotate_columns, CameraRay,
        CutoutSampler,
    };
    pub use crate::raster::{
        is_finite_depth, normalize_height, DepthPanorama, Geocalibration, HeightMap,
        PerspectiveDepthMap, Raster2D, ValidityMask, SENTINEL,
    };
    pub use crate::register::{register_orientation, RegistrationResult, SearchGrid};
    pub use crate::testkit::{
        generate_scene, oracle_perspective, oracle_render, seeded_rng, SceneKind, SceneSpec,
    };
    pub use crate::voxel::{
        heightfield_depth_at, render_panorama, voxelize, RayCastConfig, VoxelGrid,
    };
}
