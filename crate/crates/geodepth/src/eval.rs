//! Depth-prediction evaluation: the standard seven-number metric suite,
//! depth-cap selection, median-scale calibration, error-vs-distance and
//! RMSE-vs-cap curves, per-image median scatter pairs, and seeded heading
//! noise for orientation-robustness studies.
//!
//! All reductions run in row-major pixel order with plain `f64` accumulation,
//! so results are identical from run to run regardless of how callers
//! parallelize around them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeodepthError, Result};
use crate::raster::{Geocalibration, Raster2D, ValidityMask};

/// The seven-number evaluation record: mean absolute relative error, mean
/// squared relative error, RMSE (meters), RMSE of natural-log depths, and the
/// fraction of pixels with `max(p/g, g/p) < 1.25^t` for t = 1, 2, 3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DepthMetrics {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

/// Which pixels participate in metrics: the mask (all-true when absent), a
/// ground-truth depth window `min_depth < gt <= depth_cap`, and a positive
/// (non-sentinel) prediction.
#[derive(Clone, Debug)]
pub struct EvalSelection {
    pub mask: Option<ValidityMask>,
    pub depth_cap: f64,
    pub min_depth: f64,
}

impl EvalSelection {
    pub fn new(depth_cap: f64) -> Result<Self> {
        let sel = EvalSelection { mask: None, depth_cap, min_depth: 0.0 };
        sel.validate()?;
        Ok(sel)
    }

    pub fn with_mask(mut self, mask: ValidityMask) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn with_min_depth(mut self, min_depth: f64) -> Result<Self> {
        self.min_depth = min_depth;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        // An infinite cap means "no cap"; NaN bounds are never meaningful.
        if self.depth_cap.is_nan() || !self.min_depth.is_finite() {
            return Err(GeodepthError::Contract(
                "selection bounds must be numbers (the cap may be infinite)".into(),
            ));
        }
        if self.depth_cap <= self.min_depth {
            return Err(GeodepthError::Contract(format!(
                "depth_cap ({}) must exceed min_depth ({})",
                self.depth_cap, self.min_depth
            )));
        }
        Ok(())
    }

    fn mask_flag(&self, idx: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m.flags()[idx])
    }

    fn admits(&self, idx: usize, gt: f64, pred: f64) -> bool {
        self.mask_flag(idx) && gt > self.min_depth && gt <= self.depth_cap && pred > 0.0
    }
}

/// One point of an evaluation curve: bin center (or cap) `x`, the error value
/// when any pixel contributed, and the contributing pixel count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: Option<f64>,
    pub n: usize,
}

fn check_shapes<P: Raster2D, G: Raster2D>(pred: &P, gt: &G, sel: &EvalSelection) -> Result<()> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(GeodepthError::Contract(format!(
            "prediction {}x{} and reference {}x{} differ in shape",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    if let Some(mask) = &sel.mask {
        if !mask.matches(pred) {
            return Err(GeodepthError::Contract("mask shape does not match rasters".into()));
        }
    }
    sel.validate()
}

/// Number of pixels the selection admits.
pub fn valid_pixel_count<P: Raster2D, G: Raster2D>(
    pred: &P,
    gt: &G,
    sel: &EvalSelection,
) -> Result<usize> {
    check_shapes(pred, gt, sel)?;
    let mut n = 0usize;
    for (idx, (&p, &g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if sel.admits(idx, g, p) {
            n += 1;
        }
    }
    Ok(n)
}

/// Standard depth metrics over the selected pixels. Errs on an empty
/// selection rather than reporting silent zeros.
pub fn compute_metrics<P: Raster2D, G: Raster2D>(
    pred: &P,
    gt: &G,
    sel: &EvalSelection,
) -> Result<DepthMetrics> {
    check_shapes(pred, gt, sel)?;
    let mut n = 0usize;
    let (mut abs_rel, mut sq_rel, mut se, mut se_log) = (0.0, 0.0, 0.0, 0.0);
    let (mut d1, mut d2, mut d3) = (0usize, 0usize, 0usize);
    const T1: f64 = 1.25;
    const T2: f64 = 1.25 * 1.25;
    const T3: f64 = 1.25 * 1.25 * 1.25;
    for (idx, (&p, &g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if !sel.admits(idx, g, p) {
            continue;
        }
        n += 1;
        let d = p - g;
        abs_rel += d.abs() / g;
        sq_rel += d * d / g;
        se += d * d;
        let dl = p.ln() - g.ln();
        se_log += dl * dl;
        let ratio = (p / g).max(g / p);
        if ratio < T1 {
            d1 += 1;
        }
        if ratio < T2 {
            d2 += 1;
        }
        if ratio < T3 {
            d3 += 1;
        }
    }
    if n == 0 {
        return Err(GeodepthError::EmptySelection(
            "no pixel passes the mask, depth window, and positive-prediction filters".into(),
        ));
    }
    let nf = n as f64;
    Ok(DepthMetrics {
        abs_rel: abs_rel / nf,
        sq_rel: sq_rel / nf,
        rmse: (se / nf).sqrt(),
        rmse_log: (se_log / nf).sqrt(),
        delta1: d1 as f64 / nf,
        delta2: d2 as f64 / nf,
        delta3: d3 as f64 / nf,
    })
}

/// Median with the even-count convention: mean of the two central order
/// statistics.
fn median_of(mut v: Vec<f64>) -> f64 {
    debug_assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn selected_pairs<P: Raster2D, G: Raster2D>(
    pred: &P,
    reference: &G,
    sel: &EvalSelection,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_shapes(pred, reference, sel)?;
    let mut ps = Vec::new();
    let mut gs = Vec::new();
    for (idx, (&p, &g)) in pred.values().iter().zip(reference.values()).enumerate() {
        if sel.admits(idx, g, p) {
            ps.push(p);
            gs.push(g);
        }
    }
    if ps.is_empty() {
        return Err(GeodepthError::EmptySelection(
            "no mutually valid pixels for median computation".into(),
        ));
    }
    Ok((ps, gs))
}

/// Scale factor aligning a prediction with a reference:
/// `median(reference) / median(prediction)` over the mutually valid pixels.
/// The reference may be ground truth or a synthetic rendering; its sentinels
/// are excluded by the selection's depth window.
pub fn median_scale_factor<P: Raster2D, G: Raster2D>(
    pred: &P,
    reference: &G,
    sel: &EvalSelection,
) -> Result<f64> {
    let (ps, gs) = selected_pairs(pred, reference, sel)?;
    let mp = median_of(ps);
    if mp <= 0.0 {
        return Err(GeodepthError::Calibration(format!(
            "median of predictions must be positive, got {mp}"
        )));
    }
    Ok(median_of(gs) / mp)
}

/// Per-image medians of reference and prediction over the valid set, the
/// point plotted in scale-alignment scatter charts.
pub fn scale_scatter<P: Raster2D, G: Raster2D>(
    pred: &P,
    gt: &G,
    sel: &EvalSelection,
) -> Result<(f64, f64)> {
    let (ps, gs) = selected_pairs(pred, gt, sel)?;
    Ok((median_of(gs), median_of(ps)))
}

/// Multiply finite depths by `s`, leaving sentinels untouched.
pub fn apply_scale<T: Raster2D>(pred: &T, s: f64) -> Result<T> {
    if !s.is_finite() || s <= 0.0 {
        return Err(GeodepthError::Contract(format!("scale factor must be positive, got {s}")));
    }
    let values = pred
        .values()
        .iter()
        .map(|&v| if v > 0.0 { v * s } else { v })
        .collect();
    pred.with_values(values)
}

/// Mean absolute error binned by ground-truth depth. Bin `b` covers
/// `[b*bin_width, (b+1)*bin_width)` up to `max_dist`; empty bins carry
/// `n = 0`. The selection's mask and `min_depth` apply; its `depth_cap` is
/// superseded by the binning range.
pub fn error_vs_distance<P: Raster2D, G: Raster2D>(
    pred: &P,
    gt: &G,
    sel: &EvalSelection,
    bin_width: f64,
    max_dist: f64,
) -> Result<Vec<CurvePoint>> {
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(GeodepthError::Contract(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !max_dist.is_finite() || max_dist <= 0.0 {
        return Err(GeodepthError::Contract(format!(
            "max distance must be positive, got {max_dist}"
        )));
    }
    let range_sel = EvalSelection { depth_cap: f64::INFINITY, ..sel.clone() };
    check_shapes(pred, gt, &EvalSelection { depth_cap: max_dist, ..sel.clone() })?;
    let n_bins = (max_dist / bin_width).ceil() as usize;
    let mut sums = vec![0.0f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (idx, (&p, &g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if !range_sel.admits(idx, g, p) {
            continue;
        }
        let b = (g / bin_width).floor();
        if b >= 0.0 && (b as usize) < n_bins {
            let b = b as usize;
            sums[b] += (p - g).abs();
            counts[b] += 1;
        }
    }
    Ok((0..n_bins)
        .map(|b| CurvePoint {
            x: (b as f64 + 0.5) * bin_width,
            y: (counts[b] > 0).then(|| sums[b] / counts[b] as f64),
            n: counts[b],
        })
        .collect())
}

/// RMSE as a function of the depth cap: one point per cap, each evaluated
/// with the base selection's mask and `min_depth`. Caps must be strictly
/// increasing; caps admitting no pixel yield `n = 0` rather than an error.
pub fn rmse_vs_depthcap<P: Raster2D, G: Raster2D>(
    pred: &P,
    gt: &G,
    sel_base: &EvalSelection,
    caps: &[f64],
) -> Result<Vec<CurvePoint>> {
    if caps.is_empty() {
        return Err(GeodepthError::Contract("cap list must be nonempty".into()));
    }
    if caps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeodepthError::Contract("caps must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(caps.len());
    for &cap in caps {
        let sel = EvalSelection { depth_cap: cap, ..sel_base.clone() };
        sel.validate()?;
        let n = valid_pixel_count(pred, gt, &sel)?;
        let y = if n > 0 {
            Some(compute_metrics(pred, gt, &sel)?.rmse)
        } else {
            None
        };
        out.push(CurvePoint { x: cap, y, n });
    }
    Ok(out)
}

/// Perturb the yaw by a seeded uniform draw from `[-theta_max, theta_max]`
/// degrees; pitch, roll, and field of view are unchanged. The generator is
/// ChaCha8 seeded with `seed`, so a given (calibration, theta, seed) triple
/// reproduces bit-for-bit.
pub fn inject_heading_noise(
    calib: &Geocalibration,
    theta_max_deg: f64,
    seed: u64,
) -> Geocalibration {
    assert!(
        theta_max_deg >= 0.0 && theta_max_deg.is_finite(),
        "theta_max must be non-negative, got {theta_max_deg}"
    );
    if theta_max_deg == 0.0 {
        return calib.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.gen_range(-theta_max_deg..=theta_max_deg);
    calib.with_yaw(calib.yaw_deg + u)
}
