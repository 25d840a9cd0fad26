//! Robust regression losses with validity masking.
//!
//! The pointwise loss is the Pseudo-Huber (Charbonnier) function
//!
//! ```text
//! L(y, y_hat) = delta^2 * (sqrt(1 + ((y - y_hat) / delta)^2) - 1)
//! ```
//!
//! which is quadratic (~r^2/2) for small residuals and linear (~delta*|r|)
//! in the tails; `delta` controls the steepness of the transition. Height and
//! depth terms combine as `alpha_h * height_loss + depth_loss`.

use crate::error::{GeodepthError, Result};
use crate::raster::{Raster2D, ValidityMask};

/// Steepness and task-weight defaults for the combined objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub delta: f64,
    pub alpha_h: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { delta: DEFAULT_DELTA, alpha_h: ALPHA_H_INITIAL }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(GeodepthError::Contract(format!(
                "loss delta must be positive, got {}",
                self.delta
            )));
        }
        if !self.alpha_h.is_finite() || self.alpha_h < 0.0 {
            return Err(GeodepthError::Contract(format!(
                "alpha_h must be non-negative, got {}",
                self.alpha_h
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_DELTA: f64 = 2.0;

/// Height-task weight schedule: start at 0.1, drop by a factor of ten after
/// five epochs. The schedule itself is the caller's business; only the
/// constants live here.
pub const ALPHA_H_INITIAL: f64 = 0.1;
pub const ALPHA_H_AFTER_WARMUP: f64 = 0.01;
pub const ALPHA_H_WARMUP_EPOCHS: u32 = 5;

/// Pointwise Pseudo-Huber loss. Zero iff `y == y_hat`, strictly positive
/// otherwise, symmetric in the residual.
pub fn pseudo_huber(y: f64, y_hat: f64, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(GeodepthError::Contract(format!("delta must be positive, got {delta}")));
    }
    if !y.is_finite() || !y_hat.is_finite() {
        return Err(GeodepthError::Contract(format!(
            "pseudo_huber inputs must be finite, got y={y}, y_hat={y_hat}"
        )));
    }
    Ok(pseudo_huber_raw(y - y_hat, delta))
}

#[inline]
fn pseudo_huber_raw(residual: f64, delta: f64) -> f64 {
    let u = residual / delta;
    delta * delta * ((1.0 + u * u).sqrt() - 1.0)
}

/// Analytic derivative of the Pseudo-Huber loss with respect to the residual
/// `r = y - y_hat`: `r / sqrt(1 + (r/delta)^2)`.
pub fn pseudo_huber_residual_derivative(residual: f64, delta: f64) -> f64 {
    let u = residual / delta;
    residual / (1.0 + u * u).sqrt()
}

/// Mean Pseudo-Huber loss over mask-true pixels, accumulated in row-major
/// order so the result is independent of any parallel caller's scheduling.
pub fn masked_mean_loss<Y: Raster2D, P: Raster2D>(
    y: &Y,
    y_hat: &P,
    mask: &ValidityMask,
    delta: f64,
) -> Result<f64> {
    if y.width() != y_hat.width() || y.height() != y_hat.height() {
        return Err(GeodepthError::Contract(format!(
            "loss inputs differ in shape: {}x{} vs {}x{}",
            y.width(),
            y.height(),
            y_hat.width(),
            y_hat.height()
        )));
    }
    if !mask.matches(y) {
        return Err(GeodepthError::Contract("mask shape does not match rasters".into()));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(GeodepthError::Contract(format!("delta must be positive, got {delta}")));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((&a, &b), &keep) in y.values().iter().zip(y_hat.values()).zip(mask.flags()) {
        if keep {
            sum += pseudo_huber_raw(a - b, delta);
            n += 1;
        }
    }
    if n == 0 {
        return Err(GeodepthError::EmptySelection("mask selects no pixels".into()));
    }
    Ok(sum / n as f64)
}

/// Weighted sum of the two task losses: `alpha_h * height_loss + depth_loss`.
pub fn combined_loss(height_loss: f64, depth_loss: f64, alpha_h: f64) -> f64 {
    alpha_h * height_loss + depth_loss
}
