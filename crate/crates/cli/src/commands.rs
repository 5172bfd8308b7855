//! Implementations behind the CLI subcommands.

use std::path::PathBuf;

use fedids_core::dataset::{self, PreparedDataset, DEFAULT_SPLIT_RATIOS};
use fedids_core::detector;
use fedids_core::eval;
use fedids_core::features::{FeatureVector, Label, FEATURE_NAMES};
use fedids_core::fedavg::FedConfig;
use fedids_core::flow;
use fedids_core::schema::{self, FeatureSchema, DEFAULT_CORRELATION_CUTOFF};
use fedids_core::traffic::{self, DatasetManifest, TrafficProfile};
use fedids_core::autoencoder::{self, TrainConfig};
use fedids_core::fedavg::Clock;

use crate::config;
use crate::csvio;
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::SystemClock;

/// Default epochs for standalone local training.
const LOCAL_EPOCHS_DEFAULT: usize = 50;

pub fn featurize(packets_path: &PathBuf, tw: f64, out: &PathBuf) -> CliResult<()> {
    if !(tw > 0.0) {
        return Err(CliError::validation("tw must be positive"));
    }
    let packets = csvio::read_packets(packets_path)?;
    let flows = flow::extract_flows(&packets, tw)
        .map_err(|e| CliError::validation(format!("{}: {e}", packets_path.display())))?;
    let rows: Vec<FeatureVector> = flows
        .iter()
        .map(|f| fedids_core::features::featurize(f))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::validation(e.to_string()))?;
    csvio::write_features(out, &rows)?;
    println!(
        "featurized {} packets into {} flows -> {}",
        packets.len(),
        rows.len(),
        out.display()
    );
    Ok(())
}

pub struct GenArgs {
    pub profile: String,
    pub n: Option<usize>,
    pub seed: u64,
    pub tw: f64,
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn gen(args: &GenArgs) -> CliResult<()> {
    if !(args.tw > 0.0) {
        return Err(CliError::validation("tw must be positive"));
    }
    let rows = match args.profile.as_str() {
        "reference" => {
            let mut manifest = match &args.manifest {
                Some(path) => config::read_manifest(path)?,
                None => DatasetManifest::default(),
            };
            manifest.seed = args.seed;
            manifest.tw = args.tw;
            if let Some(total) = args.n {
                manifest = scale_manifest(&manifest, total)?;
            }
            traffic::build_reference_dataset(&manifest)
        }
        name => {
            let label = Label::parse(name).ok_or_else(|| {
                CliError::validation(format!(
                    "unknown profile `{name}` (expected benign, synflood, udpflood, or reference)"
                ))
            })?;
            let profile = TrafficProfile::for_label(label)
                .ok_or_else(|| CliError::validation("profile `unknown` cannot be generated"))?;
            let n = args.n.ok_or_else(|| {
                CliError::validation("--n is required for single-profile generation")
            })?;
            if n == 0 {
                return Err(CliError::validation("--n must be positive"));
            }
            traffic::generate_flows(&profile, n, args.seed, args.tw)
        }
    };
    csvio::write_features(&args.out, &rows)?;
    println!("generated {} labeled flows -> {}", rows.len(), args.out.display());
    Ok(())
}

/// Rescales manifest class counts to a requested total, preserving ratios.
fn scale_manifest(manifest: &DatasetManifest, total: usize) -> CliResult<DatasetManifest> {
    let current = manifest.total_flows();
    if total == 0 || current == 0 {
        return Err(CliError::validation("total flow count must be positive"));
    }
    let factor = total as f64 / current as f64;
    let mut scaled = manifest.clone();
    for entry in scaled.entries.iter_mut() {
        entry.benign = ((entry.benign as f64 * factor).round() as usize).max(1);
        entry.synflood = (entry.synflood as f64 * factor).round() as usize;
        entry.udpflood = (entry.udpflood as f64 * factor).round() as usize;
    }
    Ok(scaled)
}

fn load_config(path: Option<&PathBuf>, seed_override: Option<u64>) -> CliResult<FedConfig> {
    let mut config = match path {
        Some(p) => config::read_fed_config(p)?,
        None => FedConfig::default(),
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    Ok(config)
}

fn prepare(rows: &[FeatureVector], config: &FedConfig) -> CliResult<PreparedDataset> {
    dataset::prepare_dataset(
        rows,
        &FEATURE_NAMES,
        DEFAULT_SPLIT_RATIOS,
        DEFAULT_CORRELATION_CUTOFF,
        config.seed,
    )
    .map_err(|e| CliError::validation(e.to_string()))
}

pub struct TrainFedArgs {
    pub data: PathBuf,
    pub config: Option<PathBuf>,
    pub model_out: PathBuf,
    pub threshold_out: PathBuf,
    pub telemetry: PathBuf,
    pub seed: Option<u64>,
}

pub fn train_fed(args: &TrainFedArgs) -> CliResult<()> {
    let rows = csvio::read_features(&args.data)?;
    let config = load_config(args.config.as_ref(), args.seed)?;
    let prepared = prepare(&rows, &config)?;
    let clock = SystemClock::new();
    let run = eval::train_federated(&prepared, &config, &clock)
        .map_err(|e| CliError::runtime(e.to_string()))?;

    formats::write_model(&args.model_out, &run.global.model, &prepared.schema)?;
    formats::write_threshold(&args.threshold_out, &run.threshold)?;
    csvio::write_telemetry(&args.telemetry, &run.telemetry)?;

    let first = run.global.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = run.global.loss_history.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} rounds across {} clients (d={}): loss {first:.6} -> {last:.6}, alpha {:.6}",
        config.n_rounds,
        config.k_clients,
        prepared.input_dim(),
        run.threshold.alpha
    );
    println!(
        "model -> {}, threshold -> {}, telemetry -> {}",
        args.model_out.display(),
        args.threshold_out.display(),
        args.telemetry.display()
    );
    Ok(())
}

pub struct TrainLocalArgs {
    pub data: PathBuf,
    pub config: Option<PathBuf>,
    pub model_out: PathBuf,
    pub seed: Option<u64>,
}

pub fn train_local(args: &TrainLocalArgs) -> CliResult<()> {
    let rows = csvio::read_features(&args.data)?;
    let config = load_config(args.config.as_ref(), args.seed)?;
    let benign: Vec<FeatureVector> = rows.into_iter().filter(|r| r.label == Label::Benign).collect();
    if benign.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no benign rows to train on",
            args.data.display()
        )));
    }

    // Fit the schema on the benign training rows themselves.
    let matrix: Vec<Vec<f64>> = benign.iter().map(|r| r.values.clone()).collect();
    let retained = schema::correlation_filter(&matrix, DEFAULT_CORRELATION_CUTOFF)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let mut feature_schema = FeatureSchema::new(
        FEATURE_NAMES.iter().map(|n| n.to_string()).collect(),
        retained,
    );
    schema::fit_scaler(&mut feature_schema, &matrix).map_err(|e| CliError::validation(e.to_string()))?;
    let scaled: Vec<Vec<f64>> = benign
        .iter()
        .map(|r| schema::apply_scaler(&feature_schema, r).map(|v| v.values))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::validation(e.to_string()))?;

    let train_config = TrainConfig {
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        epochs: config.central_epochs.unwrap_or(LOCAL_EPOCHS_DEFAULT),
        seed: config.seed,
    };
    let model = autoencoder::init_model(feature_schema.output_dim(), config.activation, config.seed)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let (trained, history) = autoencoder::train_local(&model, &scaled, &train_config)
        .map_err(|e| CliError::runtime(e.to_string()))?;

    formats::write_model(&args.model_out, &trained, &feature_schema)?;
    println!(
        "trained {} epochs on {} benign rows (d={}): loss {:.6} -> {:.6}, model -> {}",
        train_config.epochs,
        scaled.len(),
        feature_schema.output_dim(),
        history.first().copied().unwrap_or(f64::NAN),
        history.last().copied().unwrap_or(f64::NAN),
        args.model_out.display()
    );
    Ok(())
}

/// Loads a model file and scales raw feature rows through its schema.
fn load_and_scale(
    model_path: &PathBuf,
    data_path: &PathBuf,
) -> CliResult<(fedids_core::AEModel, FeatureSchema, Vec<FeatureVector>)> {
    let (model, feature_schema) = formats::read_model(model_path)?;
    let rows = csvio::read_features(data_path)?;
    let scaled: Vec<FeatureVector> = rows
        .iter()
        .map(|r| schema::apply_scaler(&feature_schema, r))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::validation(format!("{}: {e}", data_path.display())))?;
    Ok((model, feature_schema, scaled))
}

pub fn calibrate(model_path: &PathBuf, val: &PathBuf, out: &PathBuf, multiplier: f64) -> CliResult<()> {
    if !(multiplier >= 0.0 && multiplier.is_finite()) {
        return Err(CliError::validation("multiplier must be non-negative"));
    }
    let (model, _, scaled) = load_and_scale(model_path, val)?;
    let benign: Vec<&FeatureVector> = scaled.iter().filter(|r| r.label == Label::Benign).collect();
    if benign.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no benign rows to calibrate on",
            val.display()
        )));
    }
    let re_validation: Vec<f64> = benign
        .iter()
        .map(|r| autoencoder::reconstruction_error(&model, &r.values))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::validation(e.to_string()))?;
    let threshold = detector::calibrate_threshold_with(&re_validation, multiplier)
        .map_err(|e| CliError::validation(e.to_string()))?;
    formats::write_threshold(out, &threshold)?;
    println!(
        "calibrated on {} benign rows: median {:.6}, mad {:.6}, alpha {:.6} -> {}",
        threshold.n_validation,
        threshold.median_re,
        threshold.mad,
        threshold.alpha,
        out.display()
    );
    Ok(())
}

pub fn detect(
    model_path: &PathBuf,
    threshold_path: &PathBuf,
    data: &PathBuf,
    out: &PathBuf,
) -> CliResult<()> {
    let (model, _, scaled) = load_and_scale(model_path, data)?;
    let threshold = formats::read_threshold(threshold_path)?;
    let (verdicts, _) = detector::detect_batch(&model, &threshold, &scaled)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let malicious = verdicts
        .iter()
        .filter(|v| v.label == detector::VerdictLabel::Malicious)
        .count();
    csvio::write_verdicts(out, &verdicts)?;
    println!(
        "classified {} flows: {malicious} malicious, {} benign -> {}",
        verdicts.len(),
        verdicts.len() - malicious,
        out.display()
    );
    Ok(())
}

pub fn eval_single(
    model_path: &PathBuf,
    threshold_path: &PathBuf,
    test: &PathBuf,
    report: &PathBuf,
) -> CliResult<()> {
    let clock = SystemClock::new();
    let (model, _, scaled) = load_and_scale(model_path, test)?;
    let threshold = formats::read_threshold(threshold_path)?;
    let result = eval::evaluate(&model, &threshold, &scaled, 0.0)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let result = fedids_core::metrics::EvalReport {
        wall_time_seconds: clock.now_seconds(),
        ..result
    };
    csvio::write_eval_report(report, &result)?;
    print_report("test set", &result);
    println!("report -> {}", report.display());
    Ok(())
}

fn print_report(name: &str, report: &fedids_core::metrics::EvalReport) {
    let show = |v: Option<f64>| match v {
        Some(x) => format!("{:.2}%", 100.0 * x),
        None => "NA".to_string(),
    };
    println!(
        "{name}: accuracy {} f1 {} fpr {} ({})",
        show(report.accuracy),
        show(report.f1),
        show(report.fpr),
        report.counts
    );
}

pub struct EvalSweepArgs {
    pub data: PathBuf,
    pub config: Option<PathBuf>,
    pub k_values: Vec<usize>,
    pub report: PathBuf,
    pub seed: Option<u64>,
}

pub fn eval_sweep_clients(args: &EvalSweepArgs) -> CliResult<()> {
    if args.k_values.is_empty() {
        return Err(CliError::validation("--k needs at least one client count"));
    }
    let rows = csvio::read_features(&args.data)?;
    let config = load_config(args.config.as_ref(), args.seed)?;
    let prepared = prepare(&rows, &config)?;
    let clock = SystemClock::new();
    let cells = eval::sweep_clients(&prepared, &config, &args.k_values, &clock)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    csvio::write_sweep_report(&args.report, &cells)?;
    for cell in &cells {
        print_report(&format!("k={}", cell.k_clients), &cell.report);
    }
    println!("sweep report -> {}", args.report.display());
    Ok(())
}

pub fn eval_per_attack(
    model_path: &PathBuf,
    threshold_path: &PathBuf,
    test: &PathBuf,
    report: &PathBuf,
) -> CliResult<()> {
    let (model, _, scaled) = load_and_scale(model_path, test)?;
    let threshold = formats::read_threshold(threshold_path)?;
    let reports = eval::per_attack_eval(&model, &threshold, &scaled)
        .map_err(|e| CliError::validation(e.to_string()))?;
    csvio::write_per_attack_report(report, &reports)?;
    for r in &reports {
        print_report(r.attack.as_str(), &r.report);
    }
    println!("per-attack report -> {}", report.display());
    Ok(())
}

pub struct EvalCompareArgs {
    pub data: PathBuf,
    pub config: Option<PathBuf>,
    pub report: PathBuf,
    pub seed: Option<u64>,
}

pub fn eval_central_vs_fed(args: &EvalCompareArgs) -> CliResult<()> {
    let rows = csvio::read_features(&args.data)?;
    let config = load_config(args.config.as_ref(), args.seed)?;
    let prepared = prepare(&rows, &config)?;
    let clock = SystemClock::new();
    let comparison = eval::compare_central_vs_federated(&prepared, &config, &clock)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    csvio::write_comparison_report(&args.report, &comparison)?;
    print_report("centralized", &comparison.centralized);
    print_report("federated", &comparison.federated);
    println!("comparison report -> {}", args.report.display());
    Ok(())
}
