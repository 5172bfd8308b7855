//! Confusion counts and detection metrics.
//!
//! Attack flows are the positive class. Metrics with a zero denominator are
//! reported as absent (`None`) rather than coerced to 0.

use core::fmt;

/// Raw confusion-matrix tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    /// `fn` is reserved in Rust.
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl fmt::Display for ConfusionCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tp={} tn={} fp={} fn={}",
            self.tp, self.tn, self.fp, self.fn_
        )
    }
}

/// (TP + TN) / (TP + TN + FP + FN); absent for an empty matrix.
pub fn accuracy(c: &ConfusionCounts) -> Option<f64> {
    let total = c.total();
    if total == 0 {
        return None;
    }
    Some((c.tp + c.tn) as f64 / total as f64)
}

/// 2·TP / (2·TP + FP + FN); absent when the denominator is zero.
pub fn f1(c: &ConfusionCounts) -> Option<f64> {
    let denominator = 2 * c.tp + c.fp + c.fn_;
    if denominator == 0 {
        return None;
    }
    Some(2.0 * c.tp as f64 / denominator as f64)
}

/// False positive rate FP / (FP + TN); absent when no negatives were seen.
pub fn fpr(c: &ConfusionCounts) -> Option<f64> {
    let denominator = c.fp + c.tn;
    if denominator == 0 {
        return None;
    }
    Some(c.fp as f64 / denominator as f64)
}

/// Metrics of one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
    /// Coarse whole-cell wall time, seconds.
    pub wall_time_seconds: f64,
}

impl EvalReport {
    /// Derives all metrics from the counts.
    pub fn from_counts(counts: ConfusionCounts, wall_time_seconds: f64) -> Self {
        EvalReport {
            counts,
            accuracy: accuracy(&counts),
            f1: f1(&counts),
            fpr: fpr(&counts),
            wall_time_seconds,
        }
    }
}
