//! Generate a procedural scene, voxelize it, and render the synthetic depth
//! panorama, saving both rasters (PFM + geo sidecar) to a temp directory.
//!
//! Run with: cargo run --example scene_to_panorama

use std::env;

use geodepth::io;
use geodepth::prelude::*;

fn main() -> Result<()> {
    let out_dir = env::temp_dir().join("geodepth-scene-example");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    // A 128 m x 128 m block of scattered buildings at 1 m ground sample
    // distance, camera in the middle of the street grid.
    let spec = SceneSpec::box_field(128, 128, 1.0, 42);
    let heights = generate_scene(&spec)?;
    println!(
        "scene: {}x{} px, gsd {} m, heights 0..{:.1} m",
        heights.width(),
        heights.height(),
        heights.gsd(),
        heights.max_value()
    );

    let heights_path = out_dir.join("heights.pfm");
    let sidecar = io::GeoSidecar {
        gsd_m: heights.gsd(),
        eye_height_m: Some(2.5),
        vertical_voxel_m: Some(1.0),
    };
    io::save_height_map(&heights, &sidecar, &heights_path)?;

    // Voxelize and ray-cast from the grid center.
    let grid = voxelize(&heights, 1.0)?;
    println!(
        "voxel grid: {}x{}x{} cells ({} m horizontal, {} m vertical)",
        grid.nx(),
        grid.ny(),
        grid.nz(),
        grid.cell_xy(),
        grid.cell_z()
    );

    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;
    let (lo, hi) = pano.finite_range().expect("some rays hit");
    println!(
        "panorama: {}x{}, hit fraction {:.3}, depths {:.2}..{:.2} m",
        pano.width(),
        pano.height(),
        pano.hit_fraction(),
        lo,
        hi
    );

    let pano_path = out_dir.join("pano.pfm");
    io::save_depth(&pano, &pano_path)?;
    println!("wrote {} and {}", heights_path.display(), pano_path.display());

    // Single-ray probes agree with the rendered pixels by construction.
    let down = heightfield_depth_at(&grid, 0.0, -90.0, &cfg)?;
    println!("straight-down probe: {down} m (eye height {} m)", cfg.eye_height_m);
    Ok(())
}
