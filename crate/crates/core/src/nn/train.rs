use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::preprocess::Sample;
use crate::{HarError, Result};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::layers::softmax_xent;
use super::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without improvement of the stop-set loss before giving up.
    pub patience: usize,
    pub seed: u64,
    pub lr: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            max_epochs: 3000,
            patience: 100,
            seed: 42,
            lr: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(HarError::InvalidArgument(
                "batch size and max epochs must be at least 1".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(HarError::InvalidArgument(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(HarError::InvalidArgument(format!("learning rate {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean of the mini-batch losses seen during the epoch (with dropout).
    pub train_loss: f64,
    pub stop_loss: f64,
    pub stop_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest stop-set loss.
    pub model: ModelParams,
    pub epochs_to_best: usize,
    pub history: Vec<EpochRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Accuracy and mean cross-entropy with dropout disabled. Per-sample
/// results are computed in parallel and summed in sample order.
pub fn evaluate(model: &ModelParams, samples: &[&Sample]) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(HarError::InvalidArgument("cannot evaluate on no samples".into()));
    }
    let per_sample: Vec<(f64, bool)> = samples
        .par_iter()
        .map(|s| {
            let logits = model.logits::<ChaCha8Rng>(s, None)?;
            let loss = softmax_xent(&logits, s.class_index)?.loss;
            Ok((loss, argmax(&logits) == s.class_index))
        })
        .collect::<Result<_>>()?;
    let n = per_sample.len() as f64;
    let loss = per_sample.iter().map(|p| p.0).sum::<f64>() / n;
    let correct = per_sample.iter().filter(|p| p.1).count();
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        loss,
    })
}

fn diverged(epoch: usize, err: HarError) -> HarError {
    match err {
        HarError::NonFinite(_) => HarError::Diverged {
            epoch,
            loss: f64::NAN,
        },
        other => other,
    }
}

/// Mini-batch Adam with early stopping on `stop` loss.
///
/// Each epoch shuffles the training set, takes one Adam step per batch on
/// the mean batch loss, then scores the stop set. Training ends after
/// `patience` epochs without a strictly lower stop loss, or at
/// `max_epochs`.
pub fn train(
    mut model: ModelParams,
    train_set: &[&Sample],
    stop_set: &[&Sample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || stop_set.is_empty() {
        return Err(HarError::InvalidArgument(
            "training and stop sets must be non-empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = AdamState::new(
        model.tensors(),
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
    );
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| train_set[i]).collect();
            let (loss, grads) = model
                .loss_and_grad(&batch, Some(&mut rng))
                .map_err(|e| diverged(epoch, e))?;
            if !loss.is_finite() {
                return Err(HarError::Diverged { epoch, loss });
            }
            adam_step(&mut model.tensors_mut(), &grads.tensors(), &mut adam)
                .map_err(|e| diverged(epoch, e))?;
            loss_sum += loss;
            batches += 1;
        }
        let eval = evaluate(&model, stop_set).map_err(|e| diverged(epoch, e))?;
        if !eval.loss.is_finite() {
            return Err(HarError::Diverged {
                epoch,
                loss: eval.loss,
            });
        }
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            stop_loss: eval.loss,
            stop_accuracy: eval.accuracy,
        });
        log::debug!(
            "epoch {epoch}: train {:.4} stop {:.4} acc {:.4}",
            loss_sum / batches as f64,
            eval.loss,
            eval.accuracy
        );

        if best.as_ref().is_none_or(|(l, _, _)| eval.loss < *l) {
            best = Some((eval.loss, epoch, model.clone()));
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= cfg.patience {
            break;
        }
    }
    let (_, epochs_to_best, model) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        epochs_to_best,
        history,
    })
}
