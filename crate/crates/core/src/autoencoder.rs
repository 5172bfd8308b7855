//! From-scratch deep autoencoder in 64-bit floats.
//!
//! The architecture is fixed at three hidden layers with 50% dimension
//! decrease per encoder layer and a symmetric decoder:
//! d → ⌈d/2⌉ → ⌈d/4⌉ → ⌈d/2⌉ → d. Hidden layers share one activation;
//! the output layer is identity. Gradients come from reverse-mode
//! backpropagation of the mean squared reconstruction error, and training
//! is plain mini-batch SGD.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng;

/// Hidden-layer activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Option<Activation> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(z),
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + libm::exp(-z)),
        }
    }

    /// Derivative expressed through the post-activation value `a`.
    /// For ReLU the derivative at exactly zero is defined as 0.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// One dense layer: row-major weight matrix (out_dim × in_dim) plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerParams {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerParams {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// z = W·x + b
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut out = self.bias.clone();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.weights[i * self.in_dim..(i + 1) * self.in_dim];
            *o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        out
    }
}

/// Full encoder/decoder parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AEModel {
    /// Four dense layers: two encoder, two decoder.
    pub layers: Vec<LayerParams>,
    pub activation: Activation,
    pub input_dim: usize,
    pub latent_dim: usize,
}

impl AEModel {
    /// Layer widths including input and output: d, ⌈d/2⌉, ⌈d/4⌉, ⌈d/2⌉, d.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub(crate) fn same_architecture(&self, other: &AEModel) -> bool {
        self.activation == other.activation
            && self.input_dim == other.input_dim
            && self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.in_dim == b.in_dim && a.out_dim == b.out_dim)
    }
}

/// Mini-batch SGD settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.012,
            batch_size: 128,
            epochs: 50,
            seed: 42,
        }
    }
}

/// Gradients shaped exactly like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AeError {
    /// Input dimension below the minimum of 4.
    DimensionTooSmall { dim: usize },
    /// Vector length does not match the expected layer dimension.
    DimensionMismatch { expected: usize, got: usize },
    EmptyBatch,
    EmptyDataset,
}

impl fmt::Display for AeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AeError::DimensionTooSmall { dim } => {
                write!(f, "input dimension {dim} is below the minimum of 4")
            }
            AeError::DimensionMismatch { expected, got } => {
                write!(f, "vector length {got} does not match dimension {expected}")
            }
            AeError::EmptyBatch => write!(f, "gradient batch is empty"),
            AeError::EmptyDataset => write!(f, "training dataset is empty"),
        }
    }
}

impl core::error::Error for AeError {}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Builds a model with seeded Glorot-uniform weights and zero biases.
/// Deterministic per (input_dim, seed).
pub fn init_model(input_dim: usize, activation: Activation, seed: u64) -> Result<AEModel, AeError> {
    if input_dim < 4 {
        return Err(AeError::DimensionTooSmall { dim: input_dim });
    }
    let half = ceil_div(input_dim, 2);
    let quarter = ceil_div(input_dim, 4);
    let dims = [input_dim, half, quarter, half, input_dim];

    let mut generator = rng::seeded_rng(seed);
    let layers = dims
        .windows(2)
        .map(|pair| {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let limit = libm::sqrt(6.0 / (in_dim + out_dim) as f64);
            LayerParams {
                in_dim,
                out_dim,
                weights: (0..in_dim * out_dim)
                    .map(|_| generator.random_range(-limit..limit))
                    .collect(),
                bias: vec![0.0; out_dim],
            }
        })
        .collect();

    Ok(AEModel {
        layers,
        activation,
        input_dim,
        latent_dim: quarter,
    })
}

/// Runs the two encoder layers with the hidden activation after each.
pub fn encode(model: &AEModel, x: &[f64]) -> Result<Vec<f64>, AeError> {
    if x.len() != model.input_dim {
        return Err(AeError::DimensionMismatch {
            expected: model.input_dim,
            got: x.len(),
        });
    }
    let mut a = x.to_vec();
    for layer in &model.layers[..2] {
        a = layer.affine(&a);
        for v in a.iter_mut() {
            *v = model.activation.apply(*v);
        }
    }
    Ok(a)
}

/// Runs the decoder: activation on the third layer, identity output.
pub fn decode(model: &AEModel, latent: &[f64]) -> Result<Vec<f64>, AeError> {
    if latent.len() != model.latent_dim {
        return Err(AeError::DimensionMismatch {
            expected: model.latent_dim,
            got: latent.len(),
        });
    }
    let mut a = model.layers[2].affine(latent);
    for v in a.iter_mut() {
        *v = model.activation.apply(*v);
    }
    Ok(model.layers[3].affine(&a))
}

/// Mean squared reconstruction error of one row: (1/d)·Σ (x_j − x'_j)².
pub fn reconstruction_error(model: &AEModel, x: &[f64]) -> Result<f64, AeError> {
    let reconstruction = decode(model, &encode(model, x)?)?;
    let d = x.len() as f64;
    Ok(x.iter()
        .zip(&reconstruction)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / d)
}

/// Forward pass keeping per-layer post-activation values for backprop.
/// Returns (activations a_0..a_4, squared error ‖x − x'‖² of the row).
fn forward_trace(model: &AEModel, x: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(5);
    activations.push(x.to_vec());
    for (idx, layer) in model.layers.iter().enumerate() {
        let mut a = layer.affine(activations.last().expect("non-empty trace"));
        if idx < 3 {
            for v in a.iter_mut() {
                *v = model.activation.apply(*v);
            }
        }
        activations.push(a);
    }
    let sum_sq = x
        .iter()
        .zip(&activations[4])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    (activations, sum_sq)
}

/// Mean batch loss and its gradients by reverse-mode backpropagation.
///
/// The training objective is the mean over the batch of per-row squared
/// reconstruction errors ‖x − x'‖² (summed over features, so the gradient
/// scale is independent of the feature count). Duplicating rows or permuting
/// the batch leaves the result unchanged up to summation order. The
/// per-feature-mean [`reconstruction_error`] stays the anomaly score.
pub fn loss_and_gradients(model: &AEModel, batch: &[&[f64]]) -> Result<(f64, Gradients), AeError> {
    if batch.is_empty() {
        return Err(AeError::EmptyBatch);
    }
    for row in batch {
        if row.len() != model.input_dim {
            return Err(AeError::DimensionMismatch {
                expected: model.input_dim,
                got: row.len(),
            });
        }
    }

    let mut grads = Gradients {
        layers: model
            .layers
            .iter()
            .map(|l| LayerParams::zeros(l.in_dim, l.out_dim))
            .collect(),
    };
    let mut total_loss = 0.0;
    let batch_weight = 1.0 / batch.len() as f64;

    for x in batch {
        let (activations, sum_sq) = forward_trace(model, x);
        total_loss += sum_sq;

        // Output layer is identity: δ_4 = 2(x' − x), scaled by the
        // batch-mean weight once here.
        let mut delta: Vec<f64> = activations[4]
            .iter()
            .zip(x.iter())
            .map(|(out, inp)| 2.0 * (out - inp) * batch_weight)
            .collect();

        for layer_idx in (0..4).rev() {
            let layer = &model.layers[layer_idx];
            let grad = &mut grads.layers[layer_idx];
            let input = &activations[layer_idx];

            for i in 0..layer.out_dim {
                grad.bias[i] += delta[i];
                let row = &mut grad.weights[i * layer.in_dim..(i + 1) * layer.in_dim];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += delta[i] * a;
                }
            }

            if layer_idx == 0 {
                break;
            }
            // δ_prev = (Wᵀ δ) ⊙ s'(a_prev); layers 1..3 have the hidden
            // activation on their input side.
            let mut prev = vec![0.0; layer.in_dim];
            for i in 0..layer.out_dim {
                let row = &layer.weights[i * layer.in_dim..(i + 1) * layer.in_dim];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * delta[i];
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                *p *= model.activation.derivative_from_output(*a);
            }
            delta = prev;
        }
    }

    Ok((total_loss * batch_weight, grads))
}

fn apply_sgd_step(model: &mut AEModel, grads: &Gradients, learning_rate: f64) {
    for (layer, grad) in model.layers.iter_mut().zip(&grads.layers) {
        for (w, g) in layer.weights.iter_mut().zip(&grad.weights) {
            *w -= learning_rate * g;
        }
        for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
            *b -= learning_rate * g;
        }
    }
}

/// Mini-batch SGD over benign rows; returns the trained model and the mean
/// training loss per epoch (measured at the weights each batch saw).
///
/// Each epoch shuffles row order with a stream derived from
/// (config.seed, epoch index), so a run of `epochs` epochs is bit-identical
/// to shorter runs chained with [`train_local_resumed`].
pub fn train_local(
    model: &AEModel,
    rows: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<(AEModel, Vec<f64>), AeError> {
    train_local_resumed(model, rows, config, 0)
}

/// [`train_local`] with the epoch counter starting at `first_epoch`, used to
/// continue a longer training stream across federated rounds.
pub fn train_local_resumed(
    model: &AEModel,
    rows: &[Vec<f64>],
    config: &TrainConfig,
    first_epoch: usize,
) -> Result<(AEModel, Vec<f64>), AeError> {
    if rows.is_empty() {
        return Err(AeError::EmptyDataset);
    }
    assert!(config.epochs >= 1, "epochs must be at least 1");
    assert!(config.batch_size >= 1, "batch size must be at least 1");
    assert!(config.learning_rate >= 0.0, "learning rate must be non-negative");

    let mut current = model.clone();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        // Each epoch's permutation is a pure function of (seed, epoch), so
        // resumed runs replay the exact batch sequence of a longer run.
        let epoch_seed = rng::derive_seed(config.seed, (first_epoch + epoch) as u64, 0x7261_696e);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut rng::seeded_rng(epoch_seed));

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| rows[i].as_slice()).collect();
            let (loss, grads) = loss_and_gradients(&current, &batch)?;
            epoch_loss += loss * chunk.len() as f64;
            apply_sgd_step(&mut current, &grads, config.learning_rate);
        }
        history.push(epoch_loss / rows.len() as f64);
    }

    Ok((current, history))
}
