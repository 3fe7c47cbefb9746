//! Layer primitives with explicit forward and backward passes.
//!
//! Feature maps are `[channels, length]` tensors; dense layers work on flat
//! slices. Convolutions are valid cross-correlations with stride 1.

use rand::Rng;

use crate::{HarError, Result};

use super::Tensor;

/// Output length of a convolution: `floor((len - kernel + 2 * padding) / stride) + 1`.
/// A result `<= 0` means the kernel does not fit.
pub fn conv_out_len(len: usize, kernel: usize, padding: usize, stride: usize) -> i64 {
    assert!(stride >= 1, "stride must be positive");
    let span = len as i64 - kernel as i64 + 2 * padding as i64;
    span.div_euclid(stride as i64) + 1
}

fn conv_dims(input: &Tensor, weights: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
    if input.rank() != 2 || weights.rank() != 3 {
        return Err(HarError::Shape(format!(
            "conv1d expects [C, L] input and [F, C, K] weights, got {:?} and {:?}",
            input.shape(),
            weights.shape()
        )));
    }
    let (c_in, len) = (input.dim(0), input.dim(1));
    let (f, wc, k) = (weights.dim(0), weights.dim(1), weights.dim(2));
    if wc != c_in {
        return Err(HarError::Shape(format!(
            "conv1d input has {c_in} channels, weights expect {wc}"
        )));
    }
    if len < k {
        return Err(HarError::Shape(format!(
            "conv1d input length {len} shorter than kernel {k}"
        )));
    }
    Ok((c_in, len, f, k, len - k + 1))
}

/// `out[f][i] = bias[f] + sum_c sum_k w[f][c][k] * x[c][i + k]`.
///
/// Each output accumulates the bias first, then the products in `(c, k)`
/// order.
pub fn conv1d_forward(input: &Tensor, weights: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let (c_in, len, filters, k, out_len) = conv_dims(input, weights)?;
    if bias.len() != filters {
        return Err(HarError::Shape(format!(
            "conv1d bias has {} entries for {filters} filters",
            bias.len()
        )));
    }
    let x = input.data();
    let w = weights.data();
    let mut out = vec![0.0; filters * out_len];
    for f in 0..filters {
        let row = &mut out[f * out_len..(f + 1) * out_len];
        row.fill(bias[f]);
        for c in 0..c_in {
            let xc = &x[c * len..(c + 1) * len];
            let wfc = &w[(f * c_in + c) * k..(f * c_in + c + 1) * k];
            for (kk, &wv) in wfc.iter().enumerate() {
                let xs = &xc[kk..kk + out_len];
                for (o, &xv) in row.iter_mut().zip(xs) {
                    *o += wv * xv;
                }
            }
        }
    }
    Tensor::from_vec(&[filters, out_len], out)
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Option<Tensor>,
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

pub fn conv1d_backward(input: &Tensor, weights: &Tensor, grad_out: &Tensor) -> Result<ConvGrads> {
    conv1d_backward_impl(input, weights, grad_out, true)
}

pub(crate) fn conv1d_backward_impl(
    input: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
    want_input: bool,
) -> Result<ConvGrads> {
    let (c_in, len, filters, k, out_len) = conv_dims(input, weights)?;
    if grad_out.shape() != [filters, out_len] {
        return Err(HarError::Shape(format!(
            "conv1d grad_out {:?}, expected {:?}",
            grad_out.shape(),
            [filters, out_len]
        )));
    }
    let x = input.data();
    let w = weights.data();
    let mut gw = vec![0.0; filters * c_in * k];
    let mut gx = if want_input { vec![0.0; c_in * len] } else { Vec::new() };
    let mut gb = vec![0.0; filters];
    for f in 0..filters {
        let g = grad_out.row(f);
        gb[f] = g.iter().sum();
        for c in 0..c_in {
            let xc = &x[c * len..(c + 1) * len];
            let base = (f * c_in + c) * k;
            for kk in 0..k {
                gw[base + kk] = g.iter().zip(&xc[kk..kk + out_len]).map(|(a, b)| a * b).sum();
                if want_input {
                    let wv = w[base + kk];
                    let gxs = &mut gx[c * len + kk..c * len + kk + out_len];
                    for (dst, &gv) in gxs.iter_mut().zip(g) {
                        *dst += wv * gv;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: if want_input {
            Some(Tensor::from_vec(&[c_in, len], gx)?)
        } else {
            None
        },
        weights: Tensor::from_vec(&[filters, c_in, k], gw)?,
        bias: gb,
    })
}

/// Non-overlapping max pooling along the length axis. Returns the pooled
/// map and, per output element, the winning position within its channel.
/// Trailing elements that do not fill a window are dropped; ties go to the
/// earlier position.
pub fn maxpool_forward(input: &Tensor, width: usize) -> Result<(Tensor, Vec<usize>)> {
    if input.rank() != 2 || width == 0 {
        return Err(HarError::Shape(format!(
            "maxpool expects [C, L] input, got {:?}",
            input.shape()
        )));
    }
    let (channels, len) = (input.dim(0), input.dim(1));
    if len < width {
        return Err(HarError::Shape(format!(
            "maxpool input length {len} shorter than pool width {width}"
        )));
    }
    let out_len = len / width;
    let mut out = Vec::with_capacity(channels * out_len);
    let mut argmax = Vec::with_capacity(channels * out_len);
    for c in 0..channels {
        let row = input.row(c);
        for j in 0..out_len {
            let start = j * width;
            let mut best = start;
            for i in start + 1..start + width {
                if row[i] > row[best] {
                    best = i;
                }
            }
            out.push(row[best]);
            argmax.push(best);
        }
    }
    Ok((Tensor::from_vec(&[channels, out_len], out)?, argmax))
}

/// Route each output gradient back to the position that won the max.
pub fn maxpool_backward(argmax: &[usize], grad_out: &Tensor, input_len: usize) -> Result<Tensor> {
    if grad_out.rank() != 2 || argmax.len() != grad_out.len() {
        return Err(HarError::Shape(format!(
            "maxpool backward: {} indices for grad {:?}",
            argmax.len(),
            grad_out.shape()
        )));
    }
    let (channels, out_len) = (grad_out.dim(0), grad_out.dim(1));
    let mut gx = vec![0.0; channels * input_len];
    for c in 0..channels {
        for j in 0..out_len {
            let idx = argmax[c * out_len + j];
            if idx >= input_len {
                return Err(HarError::Shape(format!(
                    "argmax index {idx} out of range for length {input_len}"
                )));
            }
            gx[c * input_len + idx] += grad_out.row(c)[j];
        }
    }
    Tensor::from_vec(&[channels, input_len], gx)
}

fn dense_dims(input: &[f64], weights: &Tensor) -> Result<(usize, usize)> {
    if weights.rank() != 2 || weights.dim(1) != input.len() {
        return Err(HarError::Shape(format!(
            "dense layer {:?} applied to input of length {}",
            weights.shape(),
            input.len()
        )));
    }
    Ok((weights.dim(0), weights.dim(1)))
}

/// `weights . input + bias` with `weights` shaped `[out, in]`.
pub fn dense_forward(input: &[f64], weights: &Tensor, bias: &[f64]) -> Result<Vec<f64>> {
    let (m, _) = dense_dims(input, weights)?;
    if bias.len() != m {
        return Err(HarError::Shape(format!(
            "dense bias has {} entries for {m} outputs",
            bias.len()
        )));
    }
    Ok((0..m)
        .map(|i| {
            bias[i]
                + weights
                    .row(i)
                    .iter()
                    .zip(input)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Vec<f64>,
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

pub fn dense_backward(input: &[f64], weights: &Tensor, grad_out: &[f64]) -> Result<DenseGrads> {
    let (m, n) = dense_dims(input, weights)?;
    if grad_out.len() != m {
        return Err(HarError::Shape(format!(
            "dense grad_out has {} entries for {m} outputs",
            grad_out.len()
        )));
    }
    let mut gx = vec![0.0; n];
    let mut gw = Vec::with_capacity(m * n);
    for (i, &g) in grad_out.iter().enumerate() {
        gw.extend(input.iter().map(|x| g * x));
        for (dst, w) in gx.iter_mut().zip(weights.row(i)) {
            *dst += g * w;
        }
    }
    Ok(DenseGrads {
        input: gx,
        weights: Tensor::from_vec(&[m, n], gw)?,
        bias: grad_out.to_vec(),
    })
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Gradient passes where the pre-activation was strictly positive.
pub fn relu_backward(pre: &[f64], grad_out: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(grad_out)
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxXent {
    pub loss: f64,
    pub probs: Vec<f64>,
    pub grad_logits: Vec<f64>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax followed by cross-entropy against `true_class`.
pub fn softmax_xent(logits: &[f64], true_class: usize) -> Result<SoftmaxXent> {
    if true_class >= logits.len() {
        return Err(HarError::InvalidArgument(format!(
            "class {true_class} out of range for {} logits",
            logits.len()
        )));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(HarError::NonFinite("logits".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    let loss = sum.ln() - (logits[true_class] - max);
    let probs = softmax(logits);
    let mut grad_logits = probs.clone();
    grad_logits[true_class] -= 1.0;
    Ok(SoftmaxXent {
        loss,
        probs,
        grad_logits,
    })
}

/// Inverted dropout. In training mode each element is zeroed with
/// probability `rate` and survivors are scaled by `1 / (1 - rate)`; the
/// returned mask holds the per-element factor for the backward pass.
pub fn dropout<R: Rng + ?Sized>(
    x: &[f64],
    rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(HarError::InvalidArgument(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    if !training || rate == 0.0 {
        return Ok((x.to_vec(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = x
        .iter()
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let out = x.iter().zip(&mask).map(|(v, m)| v * m).collect();
    Ok((out, Some(mask)))
}

pub fn dropout_backward(mask: Option<&[f64]>, grad_out: &[f64]) -> Vec<f64> {
    match mask {
        Some(m) => grad_out.iter().zip(m).map(|(g, k)| g * k).collect(),
        None => grad_out.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn conv_out_len_cases() {
        assert_eq!(conv_out_len(50, 7, 0, 1), 44);
        assert_eq!(conv_out_len(37, 1, 0, 1), 37);
        assert_eq!(conv_out_len(4, 5, 0, 1), 0);
        assert_eq!(conv_out_len(3, 7, 0, 1), -3);
    }

    #[test]
    fn conv_single_output() {
        let out = conv1d_forward(&t(&[1, 3], &[1., 2., 3.]), &t(&[1, 1, 3], &[1., 0., 0.]), &[0.0]).unwrap();
        assert_eq!(out.shape(), &[1, 1]);
        assert_eq!(out.data(), &[1.0]);
    }

    #[test]
    fn conv_impulse_shifts() {
        let x = t(&[1, 6], &[3., 1., 4., 1., 5., 9.]);
        let out = conv1d_forward(&x, &t(&[1, 1, 3], &[0., 0., 1.]), &[0.0]).unwrap();
        assert_eq!(out.data(), &[4., 1., 5., 9.]);
    }

    #[test]
    fn conv_bias_only() {
        let x = t(&[2, 5], &[1., -2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        let out = conv1d_forward(&x, &Tensor::zeros(&[3, 2, 2]), &[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(out.shape(), &[3, 4]);
        assert!(out.row(0).iter().all(|&v| v == 0.5));
        assert!(out.row(1).iter().all(|&v| v == -1.0));
        assert!(out.row(2).iter().all(|&v| v == 2.0));
    }

    #[test]
    fn conv_rejects_short_input_and_mismatch() {
        assert!(conv1d_forward(&Tensor::zeros(&[1, 2]), &Tensor::zeros(&[1, 1, 3]), &[0.0]).is_err());
        assert!(conv1d_forward(&Tensor::zeros(&[2, 5]), &Tensor::zeros(&[1, 1, 3]), &[0.0]).is_err());
        let err = conv1d_backward(&Tensor::zeros(&[1, 5]), &Tensor::zeros(&[1, 1, 3]), &Tensor::zeros(&[1, 2]));
        assert!(err.is_err());
    }

    #[test]
    fn conv_backward_zero_grad() {
        let x = t(&[2, 4], &[1., 2., 3., 4., 5., 6., 7., 8.]);
        let w = t(&[1, 2, 2], &[1., -1., 0.5, 2.]);
        let g = conv1d_backward(&x, &w, &Tensor::zeros(&[1, 3])).unwrap();
        assert!(g.input.unwrap().data().iter().all(|&v| v == 0.0));
        assert!(g.weights.data().iter().all(|&v| v == 0.0));
        assert_eq!(g.bias, vec![0.0]);
    }

    #[test]
    fn conv_backward_scalar() {
        let g = conv1d_backward(&t(&[1, 1], &[3.0]), &t(&[1, 1, 1], &[-2.0]), &t(&[1, 1], &[0.5])).unwrap();
        assert_eq!(g.weights.data(), &[1.5]);
        assert_eq!(g.input.unwrap().data(), &[-1.0]);
        assert_eq!(g.bias, vec![0.5]);
    }

    #[test]
    fn maxpool_hand_case() {
        let (out, idx) = maxpool_forward(&t(&[1, 5], &[1., 3., 2., 2., 9.]), 2).unwrap();
        assert_eq!(out.data(), &[3., 2.]);
        assert_eq!(idx, vec![1, 2]);
        let g = maxpool_backward(&idx, &t(&[1, 2], &[1., 1.]), 5).unwrap();
        assert_eq!(g.data(), &[0., 1., 1., 0., 0.]);
    }

    #[test]
    fn maxpool_ties_and_monotone() {
        let (out, idx) = maxpool_forward(&t(&[1, 6], &[4.; 6]), 2).unwrap();
        assert_eq!(out.data(), &[4., 4., 4.]);
        assert!(idx.iter().all(|i| i % 2 == 0));
        let (out, _) = maxpool_forward(&t(&[1, 6], &[1., 2., 3., 4., 5., 6.]), 2).unwrap();
        assert_eq!(out.data(), &[2., 4., 6.]);
    }

    #[test]
    fn maxpool_errors() {
        assert!(maxpool_forward(&t(&[1, 1], &[1.]), 2).is_err());
        assert!(maxpool_backward(&[7], &t(&[1, 1], &[1.]), 4).is_err());
        let g = maxpool_backward(&[0, 3], &Tensor::zeros(&[1, 2]), 4).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dense_identity_and_bias() {
        let eye = t(&[3, 3], &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert_eq!(dense_forward(&[1., -2., 3.], &eye, &[0.; 3]).unwrap(), vec![1., -2., 3.]);
        let w = t(&[2, 3], &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(dense_forward(&[0.; 3], &w, &[7., 8.]).unwrap(), vec![7., 8.]);
        assert!(dense_forward(&[0.; 2], &w, &[7., 8.]).is_err());
        assert!(dense_backward(&[0.; 3], &w, &[1.0]).is_err());
    }

    #[test]
    fn relu_cases() {
        assert_eq!(relu(&[-1., 0., 2.]), vec![0., 0., 2.]);
        assert_eq!(relu(&[0.5, 3.]), vec![0.5, 3.]);
        assert_eq!(relu_backward(&[-1., 0., 2.], &[1., 1., 1.]), vec![0., 0., 1.]);
    }

    #[test]
    fn softmax_uniform_and_shift() {
        let r = softmax_xent(&[0.3; 5], 2).unwrap();
        assert!(r.probs.iter().all(|p| (p - 0.2).abs() < 1e-15));
        assert!((r.loss - 5f64.ln()).abs() < 1e-15);
        let base = [0.1, -2.0, 3.5, 0.0, 1.25];
        let shifted: Vec<f64> = base.iter().map(|l| l + 123.0).collect();
        let a = softmax_xent(&base, 3).unwrap();
        let b = softmax_xent(&shifted, 3).unwrap();
        assert!((a.loss - b.loss).abs() < 1e-12);
        for (p, q) in a.probs.iter().zip(&b.probs) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_peaked() {
        let r = softmax_xent(&[10., 0., 0., 0., 0.], 0).unwrap();
        let oracle = (4.0 * (-10f64).exp()).ln_1p();
        assert!((r.loss - oracle).abs() < 1e-15);
        assert!((r.loss - 1.8158e-4).abs() < 1e-8);
        let g_sum: f64 = r.grad_logits.iter().sum();
        assert!(g_sum.abs() < 1e-15);
    }

    #[test]
    fn softmax_rejects_nonfinite() {
        assert!(softmax_xent(&[f64::NAN, 0.0], 0).is_err());
        assert!(softmax_xent(&[f64::INFINITY, 0.0], 0).is_err());
        assert!(softmax_xent(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn dropout_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = [1.5, -2.0, 0.25];
        let (y, m) = dropout(&x, 0.3, false, &mut rng).unwrap();
        assert_eq!(y, x.to_vec());
        assert!(m.is_none());
        let (y, _) = dropout(&x, 0.0, true, &mut rng).unwrap();
        assert_eq!(y, x.to_vec());
        assert!(dropout(&x, 1.0, true, &mut rng).is_err());
        assert!(dropout(&x, -0.1, false, &mut rng).is_err());
    }

    #[test]
    fn dropout_preserves_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ones = vec![1.0; 100_000];
        let (y, mask) = dropout(&ones, 0.3, true, &mut rng).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        let g = dropout_backward(mask.as_deref(), &ones);
        assert_eq!(g, y);
    }
}
