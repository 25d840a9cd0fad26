//! The Pseudo-Huber loss: values, regimes, derivative, masking, and the
//! combined height/depth objective.
//!
//! Run with: cargo run --example loss_functions

use geodepth::losses::{self, pseudo_huber_residual_derivative};
use geodepth::prelude::*;

fn main() -> Result<()> {
    let cfg = LossConfig::default();
    println!("delta = {}, alpha_h = {}\n", cfg.delta, cfg.alpha_h);

    println!("residual      loss      r^2/2    delta*|r|   d(loss)/dr");
    for r in [0.001, 0.1, 1.0, 2.0, 5.0, 20.0, 100.0] {
        let loss = pseudo_huber(r, 0.0, cfg.delta)?;
        println!(
            "{r:>8}  {loss:>9.4}  {:>9.4}  {:>9.4}  {:>10.4}",
            r * r / 2.0,
            cfg.delta * r,
            pseudo_huber_residual_derivative(r, cfg.delta)
        );
    }
    println!("(quadratic for small residuals, linear with slope delta in the tails)\n");

    // Masked mean over a raster pair: only flagged pixels contribute.
    let y = HeightMap::new(4, 1, 1.0, vec![10.0, 12.0, 9.0, 30.0])?;
    let y_hat = HeightMap::new(4, 1, 1.0, vec![10.5, 11.0, 9.0, 0.0])?;
    let mask = ValidityMask::new(4, 1, vec![true, true, true, false])?;
    let height_loss = masked_mean_loss(&y, &y_hat, &mask, cfg.delta)?;
    println!("masked height loss over 3 of 4 pixels: {height_loss:.4}");

    let depth_loss = 0.8;
    println!(
        "combined objective: {:.4} (alpha_h * {height_loss:.4} + {depth_loss})",
        combined_loss(height_loss, depth_loss, cfg.alpha_h)
    );
    println!(
        "after {} warmup epochs the weight drops to {}",
        losses::ALPHA_H_WARMUP_EPOCHS,
        losses::ALPHA_H_AFTER_WARMUP
    );
    Ok(())
}
