//! Experiment orchestration: single evaluations, per-attack breakdowns,
//! client-count sweeps, and the centralized-vs-federated comparison.
//!
//! Every cell is deterministic given (dataset, config, seed); wall time comes
//! from the caller-supplied [`Clock`] and is the only non-reproducible field.

use alloc::vec::Vec;
use core::fmt;

use crate::autoencoder::{self, AEModel, TrainConfig};
use crate::dataset::PreparedDataset;
use crate::detector::{self, DetectionThreshold, DetectError};
use crate::features::{FeatureVector, Label};
use crate::fedavg::{self, Clock, FedConfig, FedError, GlobalModel, RoundTelemetry};
use crate::metrics::EvalReport;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// Test rows lack benign rows or lack attack rows entirely.
    MissingClass,
    Fed(FedError),
    Detect(DetectError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MissingClass => {
                write!(f, "test set must contain benign rows and at least one attack class")
            }
            EvalError::Fed(e) => write!(f, "{e}"),
            EvalError::Detect(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<FedError> for EvalError {
    fn from(e: FedError) -> Self {
        EvalError::Fed(e)
    }
}

impl From<DetectError> for EvalError {
    fn from(e: DetectError) -> Self {
        EvalError::Detect(e)
    }
}

/// Scores the rows and derives metrics; `wall_time_seconds` is whatever the
/// caller wants attributed to this cell.
pub fn evaluate(
    model: &AEModel,
    threshold: &DetectionThreshold,
    test_rows: &[FeatureVector],
    wall_time_seconds: f64,
) -> Result<EvalReport, EvalError> {
    let (_, counts) = detector::detect_batch(model, threshold, test_rows)?;
    Ok(EvalReport::from_counts(counts, wall_time_seconds))
}

/// Metrics of one attack class evaluated against the shared benign rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub attack: Label,
    pub report: EvalReport,
}

/// Evaluates each attack class separately, one-vs-benign, sharing the benign
/// rows across sub-reports.
pub fn per_attack_eval(
    model: &AEModel,
    threshold: &DetectionThreshold,
    test_rows: &[FeatureVector],
) -> Result<Vec<AttackReport>, EvalError> {
    let benign: Vec<FeatureVector> = test_rows
        .iter()
        .filter(|r| r.label == Label::Benign)
        .cloned()
        .collect();
    if benign.is_empty() {
        return Err(EvalError::MissingClass);
    }

    let mut reports = Vec::new();
    for attack in [Label::SynFlood, Label::UdpFlood] {
        let mut subset: Vec<FeatureVector> = benign.clone();
        let before = subset.len();
        subset.extend(test_rows.iter().filter(|r| r.label == attack).cloned());
        if subset.len() == before {
            continue;
        }
        reports.push(AttackReport {
            attack,
            report: evaluate(model, threshold, &subset, 0.0)?,
        });
    }
    if reports.is_empty() {
        return Err(EvalError::MissingClass);
    }
    Ok(reports)
}

/// One client-count sweep cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub k_clients: usize,
    pub report: EvalReport,
}

/// Outcome of one full federated run on a prepared dataset.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub global: GlobalModel,
    pub threshold: DetectionThreshold,
    pub telemetry: Vec<RoundTelemetry>,
}

/// Partitions the prepared training rows and runs the federation.
pub fn train_federated(
    dataset: &PreparedDataset,
    config: &FedConfig,
    clock: &dyn Clock,
) -> Result<TrainedRun, FedError> {
    let clients = fedavg::partition_clients(&dataset.train, config.k_clients, config.seed)?;
    let validation: Vec<Vec<f64>> = dataset.validation.iter().map(|r| r.values.clone()).collect();
    let (global, threshold, telemetry) =
        fedavg::run_training(&clients, &validation, config, clock)?;
    Ok(TrainedRun {
        global,
        threshold,
        telemetry,
    })
}

/// Runs the federation once per client count and evaluates every run on the
/// common test partition. Wall time covers training plus evaluation.
pub fn sweep_clients(
    dataset: &PreparedDataset,
    base_config: &FedConfig,
    k_values: &[usize],
    clock: &dyn Clock,
) -> Result<Vec<SweepCell>, EvalError> {
    assert!(!k_values.is_empty(), "sweep needs at least one client count");
    let mut cells = Vec::with_capacity(k_values.len());
    for &k_clients in k_values {
        let config = FedConfig {
            k_clients,
            ..base_config.clone()
        };
        let start = clock.now_seconds();
        let run = train_federated(dataset, &config, clock)?;
        let mut report = evaluate(&run.global.model, &run.threshold, &dataset.test, 0.0)?;
        report.wall_time_seconds = clock.now_seconds() - start;
        cells.push(SweepCell { k_clients, report });
    }
    Ok(cells)
}

/// Pooled centralized baseline: the same benign training rows as one local
/// dataset, trained with client 0's stream so a single-client federation
/// reproduces it exactly.
pub fn train_centralized(
    dataset: &PreparedDataset,
    config: &FedConfig,
) -> Result<(AEModel, DetectionThreshold), EvalError> {
    let pooled = fedavg::partition_clients(&dataset.train, 1, config.seed).map_err(FedError::from)?;
    let model = autoencoder::init_model(dataset.input_dim(), config.activation, config.seed)
        .map_err(FedError::from)?;
    let epochs = config.resolved_central_epochs();
    let trained = if epochs == 0 {
        model
    } else {
        let train_config = TrainConfig {
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            epochs,
            seed: fedavg::client_stream_seed(config.seed, 0),
        };
        autoencoder::train_local(&model, &pooled[0].rows, &train_config)
            .map_err(FedError::from)?
            .0
    };

    let re_validation: Vec<f64> = dataset
        .validation
        .iter()
        .map(|row| autoencoder::reconstruction_error(&trained, &row.values))
        .collect::<Result<_, _>>()
        .map_err(FedError::from)?;
    let threshold = detector::calibrate_threshold(&re_validation)?;
    Ok((trained, threshold))
}

/// Paired centralized/federated evaluation on the identical test partition
/// with the identical threshold procedure.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub centralized: EvalReport,
    pub federated: EvalReport,
}

pub fn compare_central_vs_federated(
    dataset: &PreparedDataset,
    config: &FedConfig,
    clock: &dyn Clock,
) -> Result<ComparisonReport, EvalError> {
    let central_start = clock.now_seconds();
    let (central_model, central_threshold) = train_centralized(dataset, config)?;
    let mut centralized = evaluate(&central_model, &central_threshold, &dataset.test, 0.0)?;
    centralized.wall_time_seconds = clock.now_seconds() - central_start;

    let fed_start = clock.now_seconds();
    let run = if config.n_rounds == 0 {
        // Zero-round smoke case: untrained global model, threshold from its
        // raw validation errors.
        let model = autoencoder::init_model(dataset.input_dim(), config.activation, config.seed)
            .map_err(FedError::from)?;
        let re_validation: Vec<f64> = dataset
            .validation
            .iter()
            .map(|row| autoencoder::reconstruction_error(&model, &row.values))
            .collect::<Result<_, _>>()
            .map_err(FedError::from)?;
        TrainedRun {
            global: GlobalModel {
                round_index: 0,
                model,
                loss_history: Vec::new(),
            },
            threshold: detector::calibrate_threshold(&re_validation)?,
            telemetry: Vec::new(),
        }
    } else {
        train_federated(dataset, config, clock)?
    };
    let mut federated = evaluate(&run.global.model, &run.threshold, &dataset.test, 0.0)?;
    federated.wall_time_seconds = clock.now_seconds() - fed_start;

    Ok(ComparisonReport {
        centralized,
        federated,
    })
}
