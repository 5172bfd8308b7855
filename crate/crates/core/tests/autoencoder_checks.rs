//! Gradient checking against central finite differences and forward-pass
//! verification against straight-line matrix arithmetic.

use fedids_core::autoencoder::{
    decode, encode, init_model, loss_and_gradients, reconstruction_error, AEModel, Activation,
};
use fedids_core::rng::seeded_rng;
use rand::Rng;

fn random_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut generator = seeded_rng(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| generator.random_range(0.0..1.0)).collect())
        .collect()
}

/// Training objective recomputed through the public forward pass: mean over
/// the batch of per-row squared errors ‖x − x'‖².
fn batch_loss(model: &AEModel, rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|r| {
            let out = decode(model, &encode(model, r).unwrap()).unwrap();
            r.iter().zip(&out).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .sum::<f64>()
        / rows.len() as f64
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Central finite differences over every parameter of every layer.
fn max_gradient_error(model: &AEModel, rows: &[Vec<f64>], step: f64) -> f64 {
    let batch: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let (_, grads) = loss_and_gradients(model, &batch).unwrap();

    let mut worst = 0.0f64;
    for layer_idx in 0..model.layers.len() {
        let n_weights = model.layers[layer_idx].weights.len();
        let n_bias = model.layers[layer_idx].bias.len();
        for entry in 0..n_weights + n_bias {
            let mut plus = model.clone();
            let mut minus = model.clone();
            let perturb = |m: &mut AEModel, delta: f64| {
                let layer = &mut m.layers[layer_idx];
                if entry < n_weights {
                    layer.weights[entry] += delta;
                } else {
                    layer.bias[entry - n_weights] += delta;
                }
            };
            perturb(&mut plus, step);
            perturb(&mut minus, -step);
            let numeric = (batch_loss(&plus, rows) - batch_loss(&minus, rows)) / (2.0 * step);
            let analytic = if entry < n_weights {
                grads.layers[layer_idx].weights[entry]
            } else {
                grads.layers[layer_idx].bias[entry - n_weights]
            };
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences_on_small_tanh_models() {
    for seed in 0..12u64 {
        let dim = 4 + (seed as usize * 3) % 9;
        let model = init_model(dim, Activation::Tanh, 1000 + seed).unwrap();
        let rows = random_rows(3, dim, 2000 + seed);
        let worst = max_gradient_error(&model, &rows, 1e-5);
        assert!(
            worst <= 1e-4,
            "seed {seed} dim {dim}: max relative gradient error {worst}"
        );
    }
}

#[test]
fn gradients_match_finite_differences_for_relu_and_sigmoid() {
    for (seed, activation) in [(5u64, Activation::Relu), (6, Activation::Sigmoid)] {
        let model = init_model(8, activation, seed).unwrap();
        let rows = random_rows(4, 8, 90 + seed);
        let worst = max_gradient_error(&model, &rows, 1e-5);
        // ReLU kinks can sit near a sampled point; the bound stays loose but
        // still catches sign and indexing mistakes.
        let bound = if activation == Activation::Relu { 1e-3 } else { 1e-4 };
        assert!(worst <= bound, "{activation:?}: error {worst}");
    }
}

/// Straight-line re-implementation of the forward pass: an explicit affine
/// map per layer using std float math, no shared code with the crate.
fn oracle_forward(model: &AEModel, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let act = |v: f64| match model.activation {
        Activation::Tanh => v.tanh(),
        Activation::Relu => v.max(0.0),
        Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
    };
    let affine = |layer: &fedids_core::autoencoder::LayerParams, input: &[f64]| -> Vec<f64> {
        (0..layer.out_dim)
            .map(|i| {
                let mut acc = layer.bias[i];
                for j in 0..layer.in_dim {
                    acc += layer.weights[i * layer.in_dim + j] * input[j];
                }
                acc
            })
            .collect()
    };

    let h1: Vec<f64> = affine(&model.layers[0], x).into_iter().map(act).collect();
    let latent: Vec<f64> = affine(&model.layers[1], &h1).into_iter().map(act).collect();
    let h3: Vec<f64> = affine(&model.layers[2], &latent).into_iter().map(act).collect();
    let out = affine(&model.layers[3], &h3);
    (latent, out)
}

#[test]
fn encode_decode_match_matrix_arithmetic_oracle() {
    for seed in 0..20u64 {
        let dim = 4 + (seed as usize) % 14;
        let model = init_model(dim, Activation::Tanh, 300 + seed).unwrap();
        let x = random_rows(1, dim, 400 + seed).remove(0);
        let (oracle_latent, oracle_out) = oracle_forward(&model, &x);

        let latent = encode(&model, &x).unwrap();
        assert_eq!(latent.len(), oracle_latent.len());
        for (a, b) in latent.iter().zip(&oracle_latent) {
            assert!((a - b).abs() <= 1e-12, "latent mismatch: {a} vs {b}");
        }

        let out = decode(&model, &latent).unwrap();
        for (a, b) in out.iter().zip(&oracle_out) {
            assert!((a - b).abs() <= 1e-12, "output mismatch: {a} vs {b}");
        }

        let re = reconstruction_error(&model, &x).unwrap();
        let oracle_re = x
            .iter()
            .zip(&oracle_out)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / dim as f64;
        assert!((re - oracle_re).abs() <= 1e-12);
    }
}

#[test]
fn shapes_are_invariant_across_dimensions() {
    for dim in 4..=32 {
        let model = init_model(dim, Activation::Tanh, 7).unwrap();
        let x = vec![0.3; dim];
        let latent = encode(&model, &x).unwrap();
        assert_eq!(latent.len(), dim.div_ceil(4));
        assert_eq!(model.latent_dim, dim.div_ceil(4));
        assert!(model.latent_dim < dim);
        assert_eq!(decode(&model, &latent).unwrap().len(), dim);
    }
}

#[test]
fn reconstruction_error_is_nonnegative() {
    for seed in 0..50u64 {
        let model = init_model(6, Activation::Tanh, seed).unwrap();
        let x = random_rows(1, 6, seed ^ 0xabc).remove(0);
        assert!(reconstruction_error(&model, &x).unwrap() >= 0.0);
    }
}

#[test]
fn batch_permutation_leaves_gradients_unchanged() {
    let model = init_model(8, Activation::Tanh, 11).unwrap();
    let rows = random_rows(6, 8, 12);
    let forward: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let reversed: Vec<&[f64]> = rows.iter().rev().map(|r| r.as_slice()).collect();
    let (loss_a, grads_a) = loss_and_gradients(&model, &forward).unwrap();
    let (loss_b, grads_b) = loss_and_gradients(&model, &reversed).unwrap();
    assert!((loss_a - loss_b).abs() <= 1e-12);
    for (la, lb) in grads_a.layers.iter().zip(&grads_b.layers) {
        for (a, b) in la.weights.iter().zip(&lb.weights) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in la.bias.iter().zip(&lb.bias) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
