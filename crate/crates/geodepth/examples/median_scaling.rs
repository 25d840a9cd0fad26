//! Calibrating a scale-ambiguous depth prediction by median scaling, against
//! ground truth and against a synthetic overhead-derived reference.
//!
//! A monocular network trained without metric supervision predicts depth up
//! to an unknown factor. Multiplying by median(reference) / median(prediction)
//! restores metric scale; when no ground truth exists at inference time, a
//! depth rendering from a co-located height map can stand in as the
//! reference.
//!
//! Run with: cargo run --example median_scaling

use rand::Rng;

use geodepth::prelude::*;

fn main() -> Result<()> {
    // "Ground truth": a cutout of the rendered scene.
    let heights = generate_scene(&SceneSpec::box_field(96, 96, 1.0, 23))?;
    let grid = voxelize(&heights, 1.0)?;
    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg)?;
    let calib = Geocalibration::new(75.0, 0.0, 0.0, 90.0, 2.5)?;
    let gt = extract_cutout(&pano, &calib, 128, 128)?;

    // A plausible scale-free prediction: truth at an arbitrary scale with
    // mild multiplicative noise.
    let hidden_scale = 0.137;
    let mut rng = seeded_rng(4);
    let pred = gt.with_values(
        gt.values()
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    v * hidden_scale * rng.gen_range(0.95..1.05)
                } else {
                    v
                }
            })
            .collect(),
    )?;

    let sel = EvalSelection::new(80.0)?;
    let raw = compute_metrics(&pred, &gt, &sel)?;
    println!("unscaled:            rmse {:>8.3} m  abs_rel {:>7.3}", raw.rmse, raw.abs_rel);

    // Median scaling against the ground truth (the impractical upper bound).
    let s_gt = median_scale_factor(&pred, &gt, &sel)?;
    let m_gt = compute_metrics(&apply_scale(&pred, s_gt)?, &gt, &sel)?;
    println!(
        "median vs truth:     rmse {:>8.3} m  abs_rel {:>7.3}   (factor {s_gt:.3}, \
         hidden {:.3})",
        m_gt.rmse,
        m_gt.abs_rel,
        1.0 / hidden_scale
    );

    // Median scaling against the synthetic rendering: no ground truth needed.
    let reference = extract_cutout(&pano, &calib, 128, 128)?;
    let s_ref = median_scale_factor(&pred, &reference, &sel)?;
    let m_ref = compute_metrics(&apply_scale(&pred, s_ref)?, &gt, &sel)?;
    println!(
        "median vs rendering: rmse {:>8.3} m  abs_rel {:>7.3}   (factor {s_ref:.3})",
        m_ref.rmse, m_ref.abs_rel
    );

    // The per-image medians behind the factor (the scatter-plot pair).
    let (median_gt, median_pred) = scale_scatter(&pred, &gt, &sel)?;
    println!("\nscatter pair: median_gt {median_gt:.3} m, median_pred {median_pred:.3} m");
    println!("their ratio is the scale factor: {:.3}", median_gt / median_pred);
    Ok(())
}
