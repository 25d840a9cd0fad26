//! The seven-number depth evaluation suite under a depth cap, on synthetic
//! predictions with known error structure.
//!
//! Run with: cargo run --example depth_metrics

use geodepth::eval::valid_pixel_count;
use geodepth::prelude::*;

fn print_metrics(label: &str, m: &DepthMetrics) {
    println!(
        "{label:<22} abs_rel {:.4}  sq_rel {:.4}  rmse {:.4}  rmse_log {:.4}  \
         d1 {:.3} d2 {:.3} d3 {:.3}",
        m.abs_rel, m.sq_rel, m.rmse, m.rmse_log, m.delta1, m.delta2, m.delta3
    );
}

fn main() -> Result<()> {
    // Ground truth from the rendering pipeline.
    let heights = generate_scene(&SceneSpec::box_field(96, 96, 1.0, 11))?;
    let grid = voxelize(&heights, 1.0)?;
    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;
    let calib = Geocalibration::new(30.0, 0.0, 0.0, 90.0, 2.5)?;
    let gt = extract_cutout(&pano, &calib, 128, 128)?;

    let sel = EvalSelection::new(80.0)?;
    println!("depth cap 80 m, {} pixels total\n", gt.len());

    // A perfect prediction scores perfectly.
    print_metrics("perfect", &compute_metrics(&gt, &gt, &sel)?);

    // Doubling every depth: abs_rel 1, rmse_log = ln 2, all deltas 0.
    let doubled = apply_scale(&gt, 2.0)?;
    print_metrics("doubled", &compute_metrics(&doubled, &gt, &sel)?);

    // Multiplicative noise around the truth.
    let mut rng = seeded_rng(1);
    use rand::Rng;
    let noisy = gt.with_values(
        gt.values()
            .iter()
            .map(|&v| if v > 0.0 { v * rng.gen_range(0.85..1.15) } else { v })
            .collect(),
    )?;
    print_metrics("15% noise", &compute_metrics(&noisy, &gt, &sel)?);

    // Tightening the cap changes the pixel population.
    for cap in [20.0, 40.0, 80.0] {
        let sel = EvalSelection::new(cap)?;
        match compute_metrics(&noisy, &gt, &sel) {
            Ok(m) => println!(
                "cap {cap:>3} m: rmse {:.4} over {} pixels",
                m.rmse,
                valid_pixel_count(&noisy, &gt, &sel)?
            ),
            Err(e) => println!("cap {cap:>3} m: {e}"),
        }
    }
    Ok(())
}
