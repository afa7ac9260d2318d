//! Pixel-level comparison of a predicted mask against ground truth.

use crate::error::{Error, Result};
use crate::image::BinaryMask;

/// Pixel tallies from comparing a prediction with ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub f1: f64,
}

/// Harmonic mean of precision and recall, 0 when `p + r == 0`.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let denom = precision + recall;
    if denom > 0.0 {
        2.0 * precision * recall / denom
    } else {
        0.0
    }
}

fn check_dims(pred: &BinaryMask, gt: &BinaryMask) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::InconsistentInput(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    check_dims(pred, gt)?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(c)
}

pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion counts are all zero"));
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    Ok(Metrics {
        precision,
        recall,
        accuracy: ratio(c.true_pos + c.true_neg, total),
        f1: f1_score(precision, recall),
    })
}

pub const COLOR_TP: [u8; 3] = [0, 255, 0];
pub const COLOR_FN: [u8; 3] = [0, 0, 255];
pub const COLOR_FP: [u8; 3] = [255, 0, 0];
/// Background rendering for true negatives.
pub const COLOR_TN: [u8; 3] = [0, 0, 0];

/// RGB comparison image: green hits, blue misses, red false alarms, black background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayImage {
    width: usize,
    height: usize,
    rgb: Vec<[u8; 3]>,
}

impl OverlayImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.rgb
    }

    pub fn count_color(&self, color: [u8; 3]) -> usize {
        self.rgb.iter().filter(|&&c| c == color).count()
    }
}

pub fn overlay(pred: &BinaryMask, gt: &BinaryMask) -> Result<OverlayImage> {
    check_dims(pred, gt)?;
    let rgb = pred
        .bits()
        .iter()
        .zip(gt.bits())
        .map(|(&p, &g)| match (p, g) {
            (true, true) => COLOR_TP,
            (false, true) => COLOR_FN,
            (true, false) => COLOR_FP,
            (false, false) => COLOR_TN,
        })
        .collect();
    Ok(OverlayImage {
        width: pred.width(),
        height: pred.height(),
        rgb,
    })
}
