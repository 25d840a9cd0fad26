//! Recover an unknown camera heading by registering a query depth image
//! against the synthetic panorama of its location.
//!
//! The query is rendered directly from the heightfield at a hidden
//! orientation (with a little multiplicative noise), then scored against
//! panorama cutouts over a full yaw/pitch grid.
//!
//! Run with: cargo run --example orientation_search

use rand::Rng;

use geodepth::prelude::*;

fn main() -> Result<()> {
    let heights = generate_scene(&SceneSpec::box_field(64, 64, 1.0, 31))?;
    let grid = voxelize(&heights, 1.0)?;
    let cfg = RayCastConfig {
        pano_width: 256,
        pano_height: 128,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;

    // Hidden pose and a noisy query that never saw the panorama.
    let mut rng = seeded_rng(99);
    let true_yaw: f64 = rng.gen_range(0.0..360.0);
    let true_pitch: f64 = rng.gen_range(-3.0..3.0);
    let hidden = Geocalibration::new(true_yaw, true_pitch, 0.0, 90.0, 2.5)?;
    let clean = oracle_perspective(&heights, &hidden, 1.0, &cfg, 128, 128)?;
    let query = clean.with_values(
        clean
            .values()
            .iter()
            .map(|&v| if v > 0.0 { v * rng.gen_range(0.99..1.01) } else { v })
            .collect(),
    )?;

    let search = SearchGrid::default(); // 360 x 21 cells at 1 degree
    let result = register_orientation(&query, &pano, &search)?;

    println!("hidden pose:    yaw {true_yaw:.2}, pitch {true_pitch:.2}");
    println!(
        "recovered pose: yaw {:.2}, pitch {:.2}  (mae {:.3} m over {} px)",
        result.yaw_deg, result.pitch_deg, result.score, result.n_valid
    );
    let yaw_err = (result.yaw_deg - true_yaw + 540.0).rem_euclid(360.0) - 180.0;
    println!("yaw error:      {:.3} degrees\n", yaw_err.abs());

    println!("top {} candidates:", result.ranked_alternatives.len());
    for (i, alt) in result.ranked_alternatives.iter().enumerate() {
        println!(
            "  {}. yaw {:>5.1} pitch {:>5.1}  mae {:.3} m  ({} px)",
            i + 1,
            alt.yaw_deg,
            alt.pitch_deg,
            alt.score,
            alt.n_valid
        );
    }
    Ok(())
}
