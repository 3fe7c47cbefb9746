//! Oracles shared by several test targets.
#![allow(dead_code)]

use har_core::nn::{build_model, ModelParams, ModelSpec, Tensor, PARAM_TENSORS};
use har_core::preprocess::Sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn tiny_spec() -> ModelSpec {
    ModelSpec {
        in_channels: 2,
        filters: [2, 3],
        kernels: [3, 3],
        pool_width: 2,
        hidden: [6, 5],
        classes: 5,
        dropout: 0.3,
    }
}

pub fn random_samples(rng: &mut ChaCha8Rng, n: usize, w: usize, c: usize) -> Vec<Sample> {
    (0..n)
        .map(|i| Sample {
            window: Tensor::from_vec(&[w, c], (0..w * c).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .unwrap(),
            class_index: rng.gen_range(0..5),
            subject_id: 0,
            origin: (i, 0),
        })
        .collect()
}

pub fn loss(model: &ModelParams, batch: &[&Sample], mask_seed: Option<u64>) -> f64 {
    match mask_seed {
        Some(s) => model.loss_and_grad(batch, Some(&mut ChaCha8Rng::seed_from_u64(s))).unwrap().0,
        None => model.loss_and_grad::<ChaCha8Rng>(batch, None).unwrap().0,
    }
}

/// Worst relative error over every parameter of the model.
pub fn check_network(seed: u64, mask_seed: Option<u64>) -> f64 {
    let spec = tiny_spec();
    let mut model = build_model(&spec, 12, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    // Zero biases can park a ReLU exactly on its kink (e.g. when every conv
    // output is clipped), where a central difference is meaningless.
    for t in model.tensors_mut().into_iter().skip(1).step_by(2) {
        for v in t.data_mut() {
            *v = rng.gen_range(-0.1..0.1);
        }
    }
    let samples = random_samples(&mut rng, 3, 12, 2);
    let batch: Vec<&Sample> = samples.iter().collect();

    let grads = match mask_seed {
        Some(s) => model.loss_and_grad(&batch, Some(&mut ChaCha8Rng::seed_from_u64(s))).unwrap().1,
        None => model.loss_and_grad::<ChaCha8Rng>(&batch, None).unwrap().1,
    };
    let analytic = grads.tensors();

    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for t in 0..PARAM_TENSORS {
        for j in 0..analytic[t].len() {
            let orig = probe.tensors()[t].data()[j];
            probe.tensors_mut()[t].data_mut()[j] = orig + H;
            let up = loss(&probe, &batch, mask_seed);
            probe.tensors_mut()[t].data_mut()[j] = orig - H;
            let down = loss(&probe, &batch, mask_seed);
            probe.tensors_mut()[t].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * H);
            worst = worst.max(rel_err(analytic[t].data()[j], numeric));
        }
    }
    worst
}

/// Straight quadruple loop: out[f][i] = b[f] + sum over c, k of w[f][c][k] * x[c][i + k].
pub fn naive_conv(x: &[f64], c_in: usize, len: usize, w: &[f64], c_out: usize, k: usize, b: &[f64]) -> Vec<f64> {
    let out_len = len - k + 1;
    let mut out = vec![0.0; c_out * out_len];
    for f in 0..c_out {
        for i in 0..out_len {
            let mut acc = b[f];
            for c in 0..c_in {
                for j in 0..k {
                    acc += w[(f * c_in + c) * k + j] * x[c * len + i + j];
                }
            }
            out[f * out_len + i] = acc;
        }
    }
    out
}
