//! Reconstruction-error thresholding and flow classification.
//!
//! The detection threshold is median + 5·MAD over the validation
//! reconstruction errors. Both statistics use the deviation from the median,
//! so a handful of outlying validation samples barely moves the threshold.
//! A flow is malicious iff its reconstruction error strictly exceeds the
//! threshold.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::autoencoder::{self, AEModel, AeError};
use crate::features::FeatureVector;
use crate::metrics::ConfusionCounts;
use crate::stats;

/// Fixed multiplier from the calibration rule; exposed as a knob for
/// sensitivity sweeps.
pub const DEFAULT_MAD_MULTIPLIER: f64 = 5.0;

/// Calibrated detection threshold with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionThreshold {
    pub alpha: f64,
    pub median_re: f64,
    pub mad: f64,
    pub n_validation: usize,
    pub multiplier: f64,
}

/// Binary detection outcome for one flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictLabel {
    Benign,
    Malicious,
}

impl VerdictLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::Benign => "benign",
            VerdictLabel::Malicious => "malicious",
        }
    }
}

/// Per-flow detection result.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub flow_id: String,
    pub re: f64,
    pub label: VerdictLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectError {
    EmptyValidationSet,
    Model(AeError),
}

impl fmt::Display for DetectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectError::EmptyValidationSet => write!(f, "validation set is empty"),
            DetectError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DetectError {}

impl From<AeError> for DetectError {
    fn from(e: AeError) -> Self {
        DetectError::Model(e)
    }
}

/// Calibrates α = median + multiplier·MAD over validation reconstruction
/// errors. The median of an even-length list is the mean of the two central
/// order statistics.
pub fn calibrate_threshold_with(
    re_validation: &[f64],
    multiplier: f64,
) -> Result<DetectionThreshold, DetectError> {
    if re_validation.is_empty() {
        return Err(DetectError::EmptyValidationSet);
    }
    let median_re = stats::median(re_validation);
    let mad = stats::median_abs_deviation(re_validation);
    Ok(DetectionThreshold {
        alpha: median_re + multiplier * mad,
        median_re,
        mad,
        n_validation: re_validation.len(),
        multiplier,
    })
}

/// [`calibrate_threshold_with`] at the standard multiplier of 5.
pub fn calibrate_threshold(re_validation: &[f64]) -> Result<DetectionThreshold, DetectError> {
    calibrate_threshold_with(re_validation, DEFAULT_MAD_MULTIPLIER)
}

/// Malicious iff re > α; a tie is benign.
pub fn classify(re: f64, threshold: &DetectionThreshold) -> VerdictLabel {
    if re > threshold.alpha {
        VerdictLabel::Malicious
    } else {
        VerdictLabel::Benign
    }
}

/// Scores every row, classifies it, and tallies confusion counts against the
/// ground-truth labels. Attack labels are the positive class; rows labeled
/// `Unknown` receive verdicts but are left out of the confusion counts.
pub fn detect_batch(
    model: &AEModel,
    threshold: &DetectionThreshold,
    rows: &[FeatureVector],
) -> Result<(Vec<Verdict>, ConfusionCounts), DetectError> {
    let mut verdicts = Vec::with_capacity(rows.len());
    let mut counts = ConfusionCounts::default();
    for row in rows {
        let re = autoencoder::reconstruction_error(model, &row.values)?;
        let label = classify(re, threshold);
        match (row.label.is_attack(), label) {
            (true, VerdictLabel::Malicious) => counts.tp += 1,
            (true, VerdictLabel::Benign) => counts.fn_ += 1,
            (false, VerdictLabel::Malicious) if row.label == crate::features::Label::Benign => {
                counts.fp += 1
            }
            (false, VerdictLabel::Benign) if row.label == crate::features::Label::Benign => {
                counts.tn += 1
            }
            _ => {}
        }
        verdicts.push(Verdict {
            flow_id: row.flow_id.clone(),
            re,
            label,
        });
    }
    Ok((verdicts, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{init_model, Activation};
    use crate::features::Label;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn constant_validation_errors() {
        let t = calibrate_threshold(&[0.25, 0.25, 0.25]).unwrap();
        assert_eq!(t.median_re, 0.25);
        assert_eq!(t.mad, 0.0);
        assert_eq!(t.alpha, 0.25);
        assert_eq!(t.n_validation, 3);
    }

    #[test]
    fn odd_length_hand_example() {
        // median 3, deviations {2,1,0,1,97}, mad 1, alpha 3 + 5·1 = 8.
        let t = calibrate_threshold(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(t.median_re, 3.0);
        assert_eq!(t.mad, 1.0);
        assert_eq!(t.alpha, 8.0);
    }

    #[test]
    fn even_length_hand_example() {
        // median 2.5, deviations {1.5,0.5,0.5,1.5}, mad 1, alpha 7.5.
        let t = calibrate_threshold(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.median_re, 2.5);
        assert_eq!(t.mad, 1.0);
        assert_eq!(t.alpha, 7.5);
    }

    #[test]
    fn empty_validation_rejected() {
        assert_eq!(
            calibrate_threshold(&[]),
            Err(DetectError::EmptyValidationSet)
        );
    }

    #[test]
    fn tie_is_benign() {
        let t = calibrate_threshold(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(classify(t.alpha, &t), VerdictLabel::Benign);
        assert_eq!(classify(t.alpha + 1e-12, &t), VerdictLabel::Malicious);
        assert_eq!(classify(0.0, &t), VerdictLabel::Benign);
    }

    #[test]
    fn custom_multiplier() {
        let t = calibrate_threshold_with(&[1.0, 2.0, 3.0, 4.0, 100.0], 2.0).unwrap();
        assert_eq!(t.alpha, 5.0);
        assert_eq!(t.multiplier, 2.0);
    }

    fn labeled(values: Vec<f64>, label: Label, id: &str) -> FeatureVector {
        FeatureVector {
            values,
            label,
            flow_id: id.to_string(),
        }
    }

    #[test]
    fn detect_batch_empty_rows() {
        let model = init_model(4, Activation::Tanh, 1).unwrap();
        let threshold = calibrate_threshold(&[0.1, 0.2, 0.3]).unwrap();
        let (verdicts, counts) = detect_batch(&model, &threshold, &[]).unwrap();
        assert!(verdicts.is_empty());
        assert_eq!(counts, ConfusionCounts::default());
    }

    #[test]
    fn all_benign_below_threshold_counts_as_true_negatives() {
        let model = init_model(4, Activation::Tanh, 1).unwrap();
        // Huge alpha: everything classifies benign.
        let threshold = DetectionThreshold {
            alpha: 1e9,
            median_re: 0.0,
            mad: 0.0,
            n_validation: 1,
            multiplier: 5.0,
        };
        let rows = vec![
            labeled(vec![0.1, 0.2, 0.3, 0.4], Label::Benign, "a"),
            labeled(vec![0.4, 0.3, 0.2, 0.1], Label::Benign, "b"),
        ];
        let (_, counts) = detect_batch(&model, &threshold, &rows).unwrap();
        assert_eq!(counts.fp, 0);
        assert_eq!(counts.tn, 2);
    }

    #[test]
    fn unknown_rows_get_verdicts_but_no_counts() {
        let model = init_model(4, Activation::Tanh, 1).unwrap();
        let threshold = DetectionThreshold {
            alpha: 0.0,
            median_re: 0.0,
            mad: 0.0,
            n_validation: 1,
            multiplier: 5.0,
        };
        let rows = vec![labeled(vec![0.9, 0.9, 0.9, 0.9], Label::Unknown, "u")];
        let (verdicts, counts) = detect_batch(&model, &threshold, &rows).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn confusion_counts_match_row_by_row_recomputation() {
        let model = init_model(4, Activation::Tanh, 99).unwrap();
        let mut rows = Vec::new();
        for i in 0..40 {
            let v = (i as f64) / 40.0;
            let label = if i % 3 == 0 { Label::SynFlood } else { Label::Benign };
            rows.push(labeled(vec![v, 1.0 - v, v * v, 0.5], label, "r"));
        }
        let re_vals: Vec<f64> = rows
            .iter()
            .map(|r| autoencoder::reconstruction_error(&model, &r.values).unwrap())
            .collect();
        let threshold = calibrate_threshold(&re_vals).unwrap();
        let (verdicts, counts) = detect_batch(&model, &threshold, &rows).unwrap();

        let mut oracle = ConfusionCounts::default();
        for (row, verdict) in rows.iter().zip(&verdicts) {
            let re = autoencoder::reconstruction_error(&model, &row.values).unwrap();
            assert_eq!(re, verdict.re);
            let malicious = re > threshold.alpha;
            match (row.label.is_attack(), malicious) {
                (true, true) => oracle.tp += 1,
                (true, false) => oracle.fn_ += 1,
                (false, true) => oracle.fp += 1,
                (false, false) => oracle.tn += 1,
            }
        }
        assert_eq!(counts, oracle);
    }
}
