//! Error-vs-distance and RMSE-vs-depth-cap curves, printed as the same CSV
//! the CLI writes.
//!
//! Run with: cargo run --example error_curves

use rand::Rng;

use geodepth::prelude::*;

fn print_csv(title: &str, points: &[CurvePoint]) {
    println!("# {title}");
    println!("x,y,n");
    for p in points {
        let y = p.y.map_or(String::new(), |v| format!("{v:.4}"));
        println!("{},{y},{}", p.x, p.n);
    }
    println!();
}

fn main() -> Result<()> {
    // A long-range scene: a ramp keeps ground truth spread over distance.
    let heights = generate_scene(&SceneSpec {
        width: 512,
        height: 512,
        gsd: 1.0,
        seed: 0,
        kind: SceneKind::Ramp { slope: 0.02 },
    })?;
    let grid = voxelize(&heights, 1.0)?;
    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;
    let calib = Geocalibration::new(180.0, -5.0, 0.0, 90.0, 2.5)?;
    let gt = extract_cutout(&pano, &calib, 160, 160)?;

    // Prediction whose error grows with distance.
    let mut rng = seeded_rng(2);
    let pred = gt.with_values(
        gt.values()
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    v + rng.gen_range(-0.5..0.5) * (1.0 + v / 40.0)
                } else {
                    v
                }
            })
            .map(|v| if v != SENTINEL && v <= 0.0 { 0.01 } else { v })
            .collect(),
    )?;

    let sel = EvalSelection::new(80.0)?;
    let distance = error_vs_distance(&pred, &gt, &sel, 20.0, 200.0)?;
    print_csv("mean |error| by ground-truth distance (20 m bins)", &distance);

    let caps: Vec<f64> = (1..=5).map(|i| i as f64 * 40.0).collect();
    let cap_curve = rmse_vs_depthcap(&pred, &gt, &sel, &caps)?;
    print_csv("rmse by depth cap", &cap_curve);
    Ok(())
}
