//! In-process FedAvg simulation across virtual vehicle clients.
//!
//! Each round the server samples clients, every sampled client trains the
//! current global model on its own benign rows, and the server replaces the
//! global model with the sample-count-weighted average of the returned
//! parameter sets. Clients never see each other's data; the only thing that
//! leaves a client is its updated model.
//!
//! Reproducibility contract: one run seed determines client sampling, every
//! client's shuffle stream, and weight initialization. Client shuffle
//! streams are indexed by a global epoch counter (round × local epochs), so
//! a single-client federation replays the exact batch sequence of one long
//! local training run.

use alloc::vec::Vec;
use core::fmt;

use crate::autoencoder::{
    self, AEModel, Activation, AeError, LayerParams, TrainConfig,
};
use crate::detector::{self, DetectionThreshold, DetectError};
use crate::features::{FeatureVector, Label};
use crate::rng;

const SELECT_SALT: u64 = 0x5e1e_c7;
const RETRAIN_SALT: u64 = 0x5e72_74;

/// Monotonic time source for per-round telemetry. Supplied by the caller so
/// the simulation itself stays clock-free.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin.
    fn now_seconds(&self) -> f64;
}

/// Clock that always reads zero, for environments without a time source.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

/// Optional post-aggregation fine-tuning on a server-held benign sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerRetrain {
    pub enabled: bool,
    pub sample_size: usize,
    pub retrain_epochs: usize,
}

impl Default for ServerRetrain {
    fn default() -> Self {
        ServerRetrain {
            enabled: false,
            sample_size: 1000,
            retrain_epochs: 5,
        }
    }
}

/// Federation hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FedConfig {
    pub k_clients: usize,
    /// Fraction of clients sampled each round, in (0, 1].
    pub c_fraction: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub n_rounds: usize,
    pub seed: u64,
    pub activation: Activation,
    pub server_retrain: ServerRetrain,
    /// Epochs for the pooled centralized baseline; `None` matches federated
    /// compute (n_rounds × local_epochs).
    pub central_epochs: Option<usize>,
}

impl Default for FedConfig {
    fn default() -> Self {
        FedConfig {
            k_clients: 10,
            c_fraction: 1.0,
            batch_size: 128,
            local_epochs: 15,
            learning_rate: 0.012,
            n_rounds: 20,
            seed: 42,
            activation: Activation::Tanh,
            server_retrain: ServerRetrain::default(),
            central_epochs: None,
        }
    }
}

impl FedConfig {
    /// Number of clients sampled per round: max(⌊C·K⌋, 1).
    pub fn clients_per_round(&self) -> usize {
        let m = libm::floor(self.c_fraction * self.k_clients as f64) as usize;
        m.max(1)
    }

    /// Epochs used by the pooled centralized baseline.
    pub fn resolved_central_epochs(&self) -> usize {
        self.central_epochs
            .unwrap_or(self.n_rounds * self.local_epochs)
    }
}

/// One virtual client and its private benign rows.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub client_id: usize,
    /// Scaled benign feature rows; never shared with other clients.
    pub rows: Vec<Vec<f64>>,
}

impl ClientState {
    /// Sample count n_k used as the aggregation weight.
    pub fn n_k(&self) -> usize {
        self.rows.len()
    }
}

/// Global model with per-round validation-loss history.
#[derive(Debug, Clone)]
pub struct GlobalModel {
    pub round_index: usize,
    pub model: AEModel,
    pub loss_history: Vec<f64>,
}

/// Per-round telemetry line: 1-based round, validation loss, wall seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTelemetry {
    pub round: usize,
    pub loss: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FedError {
    /// Fewer benign rows than clients.
    TooFewRows { rows: usize, clients: usize },
    /// Aggregation input models disagree on shape or activation.
    ArchitectureMismatch,
    EmptyUpdateSet,
    /// A partitioned row was not benign.
    NonBenignClientRow,
    Model(AeError),
    Threshold(DetectError),
}

impl fmt::Display for FedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FedError::TooFewRows { rows, clients } => {
                write!(f, "{rows} benign rows cannot cover {clients} clients")
            }
            FedError::ArchitectureMismatch => write!(f, "client models have mismatched architectures"),
            FedError::EmptyUpdateSet => write!(f, "no client updates to aggregate"),
            FedError::NonBenignClientRow => write!(f, "client partition received a non-benign row"),
            FedError::Model(e) => write!(f, "{e}"),
            FedError::Threshold(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FedError {}

impl From<AeError> for FedError {
    fn from(e: AeError) -> Self {
        FedError::Model(e)
    }
}

impl From<DetectError> for FedError {
    fn from(e: DetectError) -> Self {
        FedError::Threshold(e)
    }
}

/// Base seed of one client's shuffle stream. Public so baselines can replay
/// a client's exact batch ordering.
pub fn client_stream_seed(run_seed: u64, client_id: usize) -> u64 {
    rng::derive_seed(run_seed, client_id as u64, 0xc11e_47)
}

/// Splits benign rows into K near-equal IID shards (sizes differ by at most
/// one) after a seeded shuffle.
pub fn partition_clients(
    benign_rows: &[FeatureVector],
    k_clients: usize,
    seed: u64,
) -> Result<Vec<ClientState>, FedError> {
    assert!(k_clients >= 1, "need at least one client");
    if benign_rows.len() < k_clients {
        return Err(FedError::TooFewRows {
            rows: benign_rows.len(),
            clients: k_clients,
        });
    }
    if benign_rows.iter().any(|r| r.label != Label::Benign) {
        return Err(FedError::NonBenignClientRow);
    }

    let mut order: Vec<usize> = (0..benign_rows.len()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng::seeded_rng(rng::derive_seed(seed, 0x9a27, 0)));

    let n = benign_rows.len();
    let base = n / k_clients;
    let remainder = n % k_clients;
    let mut clients = Vec::with_capacity(k_clients);
    let mut cursor = 0;
    for client_id in 0..k_clients {
        let size = base + usize::from(client_id < remainder);
        let rows = order[cursor..cursor + size]
            .iter()
            .map(|&i| benign_rows[i].values.clone())
            .collect();
        cursor += size;
        clients.push(ClientState { client_id, rows });
    }
    Ok(clients)
}

/// Uniformly samples m = max(⌊C·K⌋, 1) distinct client ids for one round.
/// Returned ids are sorted so results combine in client-id order.
pub fn select_clients(k_clients: usize, c_fraction: f64, round_seed: u64) -> Vec<usize> {
    assert!(c_fraction > 0.0 && c_fraction <= 1.0, "C must be in (0, 1]");
    let m = (libm::floor(c_fraction * k_clients as f64) as usize).max(1);
    let mut generator = rng::seeded_rng(round_seed);
    let mut picked = rand::seq::index::sample(&mut generator, k_clients, m.min(k_clients)).into_vec();
    picked.sort_unstable();
    picked
}

/// Sample-count-weighted average of client models: every parameter entry of
/// the result is Σ (n_k / n) · entry_k with n = Σ n_k.
///
/// Per-entry contributions are summed in value order, which makes the result
/// a pure function of the update multiset regardless of client arrival order.
pub fn aggregate(updates: &[(usize, AEModel)]) -> Result<AEModel, FedError> {
    let (_, first) = updates.first().ok_or(FedError::EmptyUpdateSet)?;
    if !updates.iter().all(|(_, m)| m.same_architecture(first)) {
        return Err(FedError::ArchitectureMismatch);
    }

    let n: usize = updates.iter().map(|(n_k, _)| n_k).sum();
    assert!(n > 0, "aggregation requires positive sample counts");
    let ratios: Vec<f64> = updates
        .iter()
        .map(|(n_k, _)| *n_k as f64 / n as f64)
        .collect();

    let mut combined = first.clone();
    let mut contributions: Vec<f64> = Vec::with_capacity(updates.len());
    for (layer_idx, layer) in combined.layers.iter_mut().enumerate() {
        for (entry_idx, out) in layer
            .weights
            .iter_mut()
            .chain(layer.bias.iter_mut())
            .enumerate()
        {
            contributions.clear();
            for ((_, model), ratio) in updates.iter().zip(&ratios) {
                let src: &LayerParams = &model.layers[layer_idx];
                let value = if entry_idx < src.weights.len() {
                    src.weights[entry_idx]
                } else {
                    src.bias[entry_idx - src.weights.len()]
                };
                contributions.push(ratio * value);
            }
            contributions.sort_by(f64::total_cmp);
            *out = contributions.iter().sum();
        }
    }
    Ok(combined)
}

fn mean_reconstruction_loss(model: &AEModel, rows: &[Vec<f64>]) -> Result<f64, AeError> {
    let mut total = 0.0;
    for row in rows {
        total += autoencoder::reconstruction_error(model, row)?;
    }
    Ok(total / rows.len() as f64)
}

/// Executes one federated round: sample clients, train each from the same
/// starting weights, aggregate, optionally fine-tune on the server sample,
/// and append the validation loss to the history.
pub fn run_round(
    global: &GlobalModel,
    clients: &[ClientState],
    validation: &[Vec<f64>],
    config: &FedConfig,
) -> Result<GlobalModel, FedError> {
    let round = global.round_index;
    let selected = select_clients(
        config.k_clients.min(clients.len()),
        config.c_fraction,
        rng::derive_seed(config.seed, round as u64, SELECT_SALT),
    );

    let mut updates: Vec<(usize, AEModel)> = Vec::with_capacity(selected.len());
    for client_id in selected {
        let client = &clients[client_id];
        let local_config = TrainConfig {
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            epochs: config.local_epochs,
            seed: client_stream_seed(config.seed, client.client_id),
        };
        let (updated, _) = autoencoder::train_local_resumed(
            &global.model,
            &client.rows,
            &local_config,
            round * config.local_epochs,
        )?;
        updates.push((client.n_k(), updated));
    }

    let mut model = aggregate(&updates)?;

    if config.server_retrain.enabled && !validation.is_empty() {
        let sample = server_sample(validation, config, round);
        let retrain_config = TrainConfig {
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            epochs: config.server_retrain.retrain_epochs,
            seed: rng::derive_seed(config.seed, round as u64, RETRAIN_SALT),
        };
        let (retrained, _) = autoencoder::train_local(&model, &sample, &retrain_config)?;
        model = retrained;
    }

    let loss = mean_reconstruction_loss(&model, validation)?;
    let mut loss_history = global.loss_history.clone();
    loss_history.push(loss);
    Ok(GlobalModel {
        round_index: round + 1,
        model,
        loss_history,
    })
}

/// Seeded sample (without replacement) of up to `sample_size` server rows.
fn server_sample(validation: &[Vec<f64>], config: &FedConfig, round: usize) -> Vec<Vec<f64>> {
    let size = config.server_retrain.sample_size.min(validation.len());
    let mut generator = rng::seeded_rng(rng::derive_seed(
        config.seed,
        round as u64,
        RETRAIN_SALT ^ 0xff,
    ));
    rand::seq::index::sample(&mut generator, validation.len(), size)
        .into_iter()
        .map(|i| validation[i].clone())
        .collect()
}

/// Runs the full federation: init, n_rounds rounds, threshold calibration on
/// the server's benign validation reconstruction errors.
pub fn run_training(
    clients: &[ClientState],
    validation: &[Vec<f64>],
    config: &FedConfig,
    clock: &dyn Clock,
) -> Result<(GlobalModel, DetectionThreshold, Vec<RoundTelemetry>), FedError> {
    assert!(!clients.is_empty(), "need at least one client");
    assert!(!validation.is_empty(), "need a validation set");
    let input_dim = clients[0].rows.first().map(|r| r.len()).unwrap_or(0);

    let mut global = GlobalModel {
        round_index: 0,
        model: autoencoder::init_model(input_dim, config.activation, config.seed)?,
        loss_history: Vec::new(),
    };

    let mut telemetry = Vec::with_capacity(config.n_rounds);
    for round in 0..config.n_rounds {
        let start = clock.now_seconds();
        global = run_round(&global, clients, validation, config)?;
        telemetry.push(RoundTelemetry {
            round: round + 1,
            loss: global.loss_history[round],
            seconds: clock.now_seconds() - start,
        });
    }

    let re_validation: Vec<f64> = validation
        .iter()
        .map(|row| autoencoder::reconstruction_error(&global.model, row))
        .collect::<Result<_, _>>()?;
    let threshold = detector::calibrate_threshold(&re_validation)?;

    Ok((global, threshold, telemetry))
}
