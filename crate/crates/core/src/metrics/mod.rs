//! Confusion metrics, ROC / PR curves and cutoff calibration.

mod calibration;
mod curves;

use serde::{Deserialize, Serialize};

pub use calibration::{calibrate_profiles, optimal_cutoff, Calibration, Objective, Provenance, ThresholdProfile};
pub use curves::{pr_auc, roc_auc, AucResult, CurveKind, CurvePoints};

use crate::error::{Error, Result};
use crate::model::BinaryLabel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn add(&mut self, truth: BinaryLabel, predicted: BinaryLabel) {
        match (truth.is_similar(), predicted.is_similar()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

pub(crate) fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn confusion(truth: &[BinaryLabel], predicted: &[BinaryLabel]) -> Result<ConfusionCounts> {
    check_lengths(truth.len(), predicted.len())?;
    let mut c = ConfusionCounts::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        c.add(t, p);
    }
    Ok(c)
}

/// Confusion of `score >= threshold` predictions.
pub fn confusion_at(scores: &[f64], truth: &[BinaryLabel], threshold: f64) -> Result<ConfusionCounts> {
    check_lengths(scores.len(), truth.len())?;
    let mut c = ConfusionCounts::default();
    for (&s, &t) in scores.iter().zip(truth) {
        let p = if s >= threshold { BinaryLabel::Similar } else { BinaryLabel::Dissimilar };
        c.add(t, p);
    }
    Ok(c)
}

/// Accuracy, precision, recall and F1.  A zero denominator yields 0 and sets
/// the matching flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default)]
    pub precision_degenerate: bool,
    #[serde(default)]
    pub recall_degenerate: bool,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn prf(c: &ConfusionCounts) -> Prf {
    let (accuracy, _) = ratio(c.tp + c.tn, c.total());
    let (precision, precision_degenerate) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_degenerate) = ratio(c.tp, c.tp + c.fn_);
    Prf { accuracy, precision, recall, f1: f1_score(precision, recall), precision_degenerate, recall_degenerate }
}
