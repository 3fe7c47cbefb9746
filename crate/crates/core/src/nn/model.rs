//! The classifier: conv -> ReLU -> pool -> conv -> ReLU -> pool -> flatten ->
//! dense -> ReLU -> dropout -> dense -> ReLU -> dropout -> dense -> softmax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::preprocess::Sample;
use crate::{HarError, Result};

use super::layers::{
    conv1d_backward_impl, conv1d_forward, conv_out_len, dense_backward, dense_forward, dropout,
    dropout_backward, maxpool_backward, maxpool_forward, relu, relu_backward, softmax_xent,
};
use super::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub in_channels: usize,
    pub filters: [usize; 2],
    pub kernels: [usize; 2],
    pub pool_width: usize,
    pub hidden: [usize; 2],
    pub classes: usize,
    pub dropout: f64,
}

impl ModelSpec {
    /// 18 input channels, 16/32 filters, 32/24 hidden units, 5 classes,
    /// dropout 0.3.
    pub fn standard(kernels: [usize; 2]) -> Self {
        Self {
            in_channels: crate::NUM_CHANNELS,
            filters: [16, 32],
            kernels,
            pool_width: 2,
            hidden: [32, 24],
            classes: crate::NUM_CLASSES,
            dropout: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            self.in_channels,
            self.filters[0],
            self.filters[1],
            self.kernels[0],
            self.kernels[1],
            self.pool_width,
            self.hidden[0],
            self.hidden[1],
            self.classes,
        ];
        if sizes.contains(&0) {
            return Err(HarError::InvalidArgument(format!("zero-sized layer in {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(HarError::InvalidArgument(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// Feature-map lengths through the network for one input length. Padding
/// is 0 and stride 1 throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapePlan {
    pub window_len: usize,
    pub kernels: [usize; 2],
    pub conv1_len: usize,
    pub pool1_len: usize,
    pub conv2_len: usize,
    pub pool2_len: usize,
    pub pool1_applied: bool,
    pub pool2_applied: bool,
    pub flatten: usize,
}

/// Lay out the network for `window_len` timesteps.
///
/// A pooling stage is skipped when it would leave the next stage without
/// enough input: pool 1 when the pooled length is shorter than the second
/// kernel, pool 2 when the conv-2 output is shorter than the pool width.
pub fn plan_shapes(spec: &ModelSpec, window_len: usize) -> Result<ShapePlan> {
    spec.validate()?;
    let [k1, k2] = spec.kernels;
    let pw = spec.pool_width;
    if window_len < k1 {
        return Err(HarError::InvalidArchitecture(format!(
            "window of {window_len} timesteps is shorter than the first kernel ({k1})"
        )));
    }
    let conv1_len = conv_out_len(window_len, k1, 0, 1) as usize;
    let (pool1_len, pool1_applied) = if conv1_len / pw < k2 {
        (conv1_len, false)
    } else {
        (conv1_len / pw, true)
    };
    let conv2 = conv_out_len(pool1_len, k2, 0, 1);
    if conv2 <= 0 {
        return Err(HarError::InvalidArchitecture(format!(
            "window of {window_len} timesteps leaves {pool1_len} for the second kernel ({k2})"
        )));
    }
    let conv2_len = conv2 as usize;
    let (pool2_len, pool2_applied) = if conv2_len < pw {
        (conv2_len, false)
    } else {
        (conv2_len / pw, true)
    };
    Ok(ShapePlan {
        window_len,
        kernels: spec.kernels,
        conv1_len,
        pool1_len,
        conv2_len,
        pool2_len,
        pool1_applied,
        pool2_applied,
        flatten: spec.filters[1] * pool2_len,
    })
}

/// Every weight and bias, plus the spec and plan they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub spec: ModelSpec,
    pub plan: ShapePlan,
    pub conv1_w: Tensor,
    pub conv1_b: Tensor,
    pub conv2_w: Tensor,
    pub conv2_b: Tensor,
    pub dense1_w: Tensor,
    pub dense1_b: Tensor,
    pub dense2_w: Tensor,
    pub dense2_b: Tensor,
    pub out_w: Tensor,
    pub out_b: Tensor,
}

pub const PARAM_TENSORS: usize = 10;

impl ModelParams {
    /// All-zero parameters with the right shapes; also used as a gradient
    /// accumulator.
    pub fn zeros(spec: ModelSpec, plan: ShapePlan) -> Self {
        let [f1, f2] = spec.filters;
        let [k1, k2] = spec.kernels;
        let [h1, h2] = spec.hidden;
        Self {
            spec,
            plan,
            conv1_w: Tensor::zeros(&[f1, spec.in_channels, k1]),
            conv1_b: Tensor::zeros(&[f1]),
            conv2_w: Tensor::zeros(&[f2, f1, k2]),
            conv2_b: Tensor::zeros(&[f2]),
            dense1_w: Tensor::zeros(&[h1, plan.flatten]),
            dense1_b: Tensor::zeros(&[h1]),
            dense2_w: Tensor::zeros(&[h2, h1]),
            dense2_b: Tensor::zeros(&[h2]),
            out_w: Tensor::zeros(&[spec.classes, h2]),
            out_b: Tensor::zeros(&[spec.classes]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.spec, self.plan)
    }

    /// Tensors in declaration order.
    pub fn tensors(&self) -> [&Tensor; PARAM_TENSORS] {
        [
            &self.conv1_w,
            &self.conv1_b,
            &self.conv2_w,
            &self.conv2_b,
            &self.dense1_w,
            &self.dense1_b,
            &self.dense2_w,
            &self.dense2_b,
            &self.out_w,
            &self.out_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; PARAM_TENSORS] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.dense1_w,
            &mut self.dense1_b,
            &mut self.dense2_w,
            &mut self.dense2_b,
            &mut self.out_w,
            &mut self.out_b,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn window_len(&self) -> usize {
        self.plan.window_len
    }

    fn check_input(&self, sample: &Sample) -> Result<()> {
        if sample.window.shape() != [self.plan.window_len, self.spec.in_channels] {
            return Err(HarError::Shape(format!(
                "sample window {:?}, model expects [{}, {}]",
                sample.window.shape(),
                self.plan.window_len,
                self.spec.in_channels
            )));
        }
        if sample.class_index >= self.spec.classes {
            return Err(HarError::InvalidArgument(format!(
                "class {} out of range",
                sample.class_index
            )));
        }
        Ok(())
    }

    /// Activations of one sample kept for the backward pass.
    fn trace<R: Rng + ?Sized>(&self, sample: &Sample, mut rng: Option<&mut R>) -> Result<Trace> {
        self.check_input(sample)?;
        let pw = self.spec.pool_width;
        let x = sample.window.transpose();

        let z1 = conv1d_forward(&x, &self.conv1_w, self.conv1_b.data())?;
        let a1 = Tensor::from_vec(z1.shape(), relu(z1.data()))?;
        let (h1, pool1) = if self.plan.pool1_applied {
            let (h, idx) = maxpool_forward(&a1, pw)?;
            (h, Some(idx))
        } else {
            (a1, None)
        };

        let z2 = conv1d_forward(&h1, &self.conv2_w, self.conv2_b.data())?;
        let a2 = Tensor::from_vec(z2.shape(), relu(z2.data()))?;
        let (h2, pool2) = if self.plan.pool2_applied {
            let (h, idx) = maxpool_forward(&a2, pw)?;
            (h, Some(idx))
        } else {
            (a2, None)
        };
        let flat = h2.into_data();

        let rate = self.spec.dropout;
        let d1_pre = dense_forward(&flat, &self.dense1_w, self.dense1_b.data())?;
        let (d1_out, d1_mask) = maybe_dropout(relu(&d1_pre), rate, rng.as_deref_mut())?;
        let d2_pre = dense_forward(&d1_out, &self.dense2_w, self.dense2_b.data())?;
        let (d2_out, d2_mask) = maybe_dropout(relu(&d2_pre), rate, rng)?;
        let logits = dense_forward(&d2_out, &self.out_w, self.out_b.data())?;

        Ok(Trace {
            x,
            z1,
            pool1,
            h1,
            z2,
            pool2,
            flat,
            d1_pre,
            d1_mask,
            d1_out,
            d2_pre,
            d2_mask,
            d2_out,
            logits,
        })
    }

    /// Pre-softmax logits for one sample. Dropout is active only when an RNG
    /// is supplied.
    pub fn logits<R: Rng + ?Sized>(&self, sample: &Sample, rng: Option<&mut R>) -> Result<Vec<f64>> {
        Ok(self.trace(sample, rng)?.logits)
    }

    /// Add the gradient of one sample's loss, scaled by `weight`, into `grads`.
    fn backward(&self, tr: &Trace, grad_logits: &[f64], weight: f64, grads: &mut ModelParams) -> Result<()> {
        let g: Vec<f64> = grad_logits.iter().map(|v| v * weight).collect();

        let out = dense_backward(&tr.d2_out, &self.out_w, &g)?;
        accumulate(&mut grads.out_w, out.weights.data());
        accumulate(&mut grads.out_b, &out.bias);

        let g = dropout_backward(tr.d2_mask.as_deref(), &out.input);
        let g = relu_backward(&tr.d2_pre, &g);
        let d2 = dense_backward(&tr.d1_out, &self.dense2_w, &g)?;
        accumulate(&mut grads.dense2_w, d2.weights.data());
        accumulate(&mut grads.dense2_b, &d2.bias);

        let g = dropout_backward(tr.d1_mask.as_deref(), &d2.input);
        let g = relu_backward(&tr.d1_pre, &g);
        let d1 = dense_backward(&tr.flat, &self.dense1_w, &g)?;
        accumulate(&mut grads.dense1_w, d1.weights.data());
        accumulate(&mut grads.dense1_b, &d1.bias);

        let g = Tensor::from_vec(&[self.spec.filters[1], self.plan.pool2_len], d1.input)?;
        let g = match &tr.pool2 {
            Some(idx) => maxpool_backward(idx, &g, self.plan.conv2_len)?,
            None => g,
        };
        let g = Tensor::from_vec(g.shape(), relu_backward(tr.z2.data(), g.data()))?;
        let c2 = conv1d_backward_impl(&tr.h1, &self.conv2_w, &g, true)?;
        accumulate(&mut grads.conv2_w, c2.weights.data());
        accumulate(&mut grads.conv2_b, &c2.bias);

        let g = c2.input.expect("requested input gradient");
        let g = match &tr.pool1 {
            Some(idx) => maxpool_backward(idx, &g, self.plan.conv1_len)?,
            None => g,
        };
        let g = Tensor::from_vec(g.shape(), relu_backward(tr.z1.data(), g.data()))?;
        let c1 = conv1d_backward_impl(&tr.x, &self.conv1_w, &g, false)?;
        accumulate(&mut grads.conv1_w, c1.weights.data());
        accumulate(&mut grads.conv1_b, &c1.bias);
        Ok(())
    }

    /// Mean cross-entropy over `batch` and its gradient with respect to
    /// every parameter. Dropout is active only when an RNG is supplied.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        batch: &[&Sample],
        mut rng: Option<&mut R>,
    ) -> Result<(f64, ModelParams)> {
        if batch.is_empty() {
            return Err(HarError::InvalidArgument("empty batch".into()));
        }
        let weight = 1.0 / batch.len() as f64;
        let mut grads = self.zeros_like();
        let mut total = 0.0;
        for s in batch {
            let tr = self.trace(s, rng.as_deref_mut())?;
            let sx = softmax_xent(&tr.logits, s.class_index)?;
            total += sx.loss;
            self.backward(&tr, &sx.grad_logits, weight, &mut grads)?;
        }
        Ok((total * weight, grads))
    }
}

fn maybe_dropout<R: Rng + ?Sized>(
    x: Vec<f64>,
    rate: f64,
    rng: Option<&mut R>,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    match rng {
        Some(r) => dropout(&x, rate, true, r),
        None => Ok((x, None)),
    }
}

fn accumulate(dst: &mut Tensor, src: &[f64]) {
    for (d, s) in dst.data_mut().iter_mut().zip(src) {
        *d += s;
    }
}

struct Trace {
    x: Tensor,
    z1: Tensor,
    pool1: Option<Vec<usize>>,
    h1: Tensor,
    z2: Tensor,
    pool2: Option<Vec<usize>>,
    flat: Vec<f64>,
    d1_pre: Vec<f64>,
    d1_mask: Option<Vec<f64>>,
    d1_out: Vec<f64>,
    d2_pre: Vec<f64>,
    d2_mask: Option<Vec<f64>>,
    d2_out: Vec<f64>,
    logits: Vec<f64>,
}

fn he_uniform(t: &mut Tensor, fan_in: usize, rng: &mut ChaCha8Rng) {
    let bound = (6.0 / fan_in as f64).sqrt();
    for v in t.data_mut() {
        *v = rng.gen_range(-bound..bound);
    }
}

/// Plan the network for `window_len` and draw He-uniform weights
/// (`U(-sqrt(6/fan_in), sqrt(6/fan_in))`); biases start at zero.
pub fn build_model(spec: &ModelSpec, window_len: usize, seed: u64) -> Result<ModelParams> {
    let plan = plan_shapes(spec, window_len)?;
    let mut p = ModelParams::zeros(*spec, plan);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [k1, k2] = spec.kernels;
    he_uniform(&mut p.conv1_w, spec.in_channels * k1, &mut rng);
    he_uniform(&mut p.conv2_w, spec.filters[0] * k2, &mut rng);
    he_uniform(&mut p.dense1_w, plan.flatten, &mut rng);
    he_uniform(&mut p.dense2_w, spec.hidden[0], &mut rng);
    he_uniform(&mut p.out_w, spec.hidden[1], &mut rng);
    Ok(p)
}

/// Logits for each sample in `batch`. Dropout is active only when an RNG is
/// supplied.
pub fn forward<R: Rng + ?Sized>(
    model: &ModelParams,
    batch: &[&Sample],
    mut rng: Option<&mut R>,
) -> Result<Vec<Vec<f64>>> {
    batch
        .iter()
        .map(|s| model.logits(s, rng.as_deref_mut()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_shape_table() {
        let cases = [
            (10, [3, 5], (8, 8, 4, 2, false, true, 64)),
            (25, [3, 5], (23, 11, 7, 3, true, true, 96)),
            (50, [7, 11], (44, 22, 12, 6, true, true, 192)),
            (100, [7, 11], (94, 47, 37, 18, true, true, 576)),
            (200, [7, 11], (194, 97, 87, 43, true, true, 1376)),
            (400, [7, 11], (394, 197, 187, 93, true, true, 2976)),
        ];
        for (w, k, want) in cases {
            let p = plan_shapes(&ModelSpec::standard(k), w).unwrap();
            let got = (
                p.conv1_len,
                p.pool1_len,
                p.conv2_len,
                p.pool2_len,
                p.pool1_applied,
                p.pool2_applied,
                p.flatten,
            );
            assert_eq!(got, want, "W = {w}");
        }
    }

    #[test]
    fn rejects_windows_shorter_than_kernel() {
        let err = plan_shapes(&ModelSpec::standard([7, 11]), 6).unwrap_err();
        assert!(matches!(err, HarError::InvalidArchitecture(_)));
        // conv1 fits but nothing is left for conv2 even without pooling
        let err = plan_shapes(&ModelSpec::standard([7, 11]), 12).unwrap_err();
        assert!(matches!(err, HarError::InvalidArchitecture(_)));
    }

    #[test]
    fn second_pool_skipped_for_single_step() {
        let p = plan_shapes(&ModelSpec::standard([3, 5]), 7).unwrap();
        assert_eq!((p.conv1_len, p.pool1_applied, p.conv2_len), (5, false, 1));
        assert!(!p.pool2_applied);
        assert_eq!(p.flatten, 32);
    }

    #[test]
    fn build_is_seeded_with_zero_biases() {
        let spec = ModelSpec::standard([7, 11]);
        let a = build_model(&spec, 50, 3).unwrap();
        let b = build_model(&spec, 50, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, build_model(&spec, 50, 4).unwrap());
        for t in [&a.conv1_b, &a.conv2_b, &a.dense1_b, &a.dense2_b, &a.out_b] {
            assert!(t.data().iter().all(|&v| v == 0.0));
        }
        assert_eq!(a.dense1_w.shape(), &[32, 192]);
        let bound = (6.0f64 / (18.0 * 7.0)).sqrt();
        assert!(a.conv1_w.data().iter().all(|v| v.abs() <= bound));
    }
}
