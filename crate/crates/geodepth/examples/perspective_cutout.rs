//! Extract perspective depth cutouts from one panorama at several headings,
//! reusing a single precomputed sampler the way the orientation search does.
//!
//! Run with: cargo run --example perspective_cutout

use geodepth::prelude::*;

fn main() -> Result<()> {
    let heights = generate_scene(&SceneSpec::box_field(96, 96, 1.0, 7))?;
    let grid = voxelize(&heights, 1.0)?;
    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;

    // Eight 90-degree cutouts, 45 degrees apart, sharing one sampler.
    let sampler = CutoutSampler::new(0.0, 0.0, 90.0, 128, 128, pano.width(), pano.height())?;
    println!("heading   finite%   min..max depth (m)");
    for i in 0..8 {
        let yaw = i as f64 * 45.0;
        let values = sampler.sample_values(&pano, yaw)?;
        let finite: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{yaw:>7}   {:>6.1}   {lo:.2}..{hi:.2}",
            100.0 * finite.len() as f64 / values.len() as f64
        );
    }

    // The one-call form attaches the calibration to the result.
    let calib = Geocalibration::new(45.0, -5.0, 0.0, 90.0, 2.5)?;
    let cut = extract_cutout(&pano, &calib, 128, 128)?;
    let c = cut.calib().expect("calibration attached");
    println!(
        "\nextract_cutout at yaw={} pitch={} keeps its calibration; center depth {:.2} m",
        c.yaw_deg,
        c.pitch_deg,
        cut.at(64, 64)
    );

    // Pixel-to-direction round trip through panorama coordinates.
    let ray = pixel_to_direction(&calib, 64, 64, 128, 128);
    let (az, el) = ray.azimuth_elevation();
    let (col, row) = direction_to_pano_coords(&ray, pano.width(), pano.height());
    println!("center ray: azimuth {az:.2}, elevation {el:.2} -> pano ({col:.2}, {row:.2})");
    Ok(())
}
