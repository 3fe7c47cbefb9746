use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nn::{build_model, evaluate, train, ModelSpec, TrainConfig};
use crate::preprocess::{compute_stats_samples, make_folds, normalize_samples, Sample};
use crate::{HarError, Result};

/// Where the z-score statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Computed once over every in-set timestep before windowing.
    #[default]
    Global,
    /// Computed per fold over the training windows only; samples passed to
    /// [`run_cv`] must be unnormalized.
    PerFold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub train: TrainConfig,
    /// Early-stop on 10% of the training folds instead of the test fold.
    pub honest_split: bool,
    pub normalization: Normalization,
    /// Run folds on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 8,
            train: TrainConfig::default(),
            honest_split: false,
            normalization: Normalization::Global,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub loss: f64,
    pub epochs_to_best: usize,
}

const HONEST_STOP_FRACTION: f64 = 0.1;

fn run_fold(
    samples: &[Sample],
    test_idx: &[usize],
    train_idx: &[usize],
    spec: &ModelSpec,
    cfg: &CvConfig,
    fold_seed: u64,
) -> Result<(usize, f64, f64)> {
    let normalized;
    let samples = match cfg.normalization {
        Normalization::Global => samples,
        Normalization::PerFold => {
            let train_refs: Vec<&Sample> = train_idx.iter().map(|&i| &samples[i]).collect();
            let stats = compute_stats_samples(&train_refs)?;
            let mut copy = samples.to_vec();
            normalize_samples(&mut copy, &stats);
            normalized = copy;
            &normalized
        }
    };
    let test: Vec<&Sample> = test_idx.iter().map(|&i| &samples[i]).collect();
    let (fit, stop): (Vec<&Sample>, Vec<&Sample>) = if cfg.honest_split {
        let mut idx = train_idx.to_vec();
        if idx.len() < 2 {
            return Err(HarError::InvalidArgument(
                "honest split needs at least two training samples".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(fold_seed);
        rng.set_stream(2);
        idx.shuffle(&mut rng);
        let n_stop = ((idx.len() as f64 * HONEST_STOP_FRACTION).round() as usize).clamp(1, idx.len() - 1);
        let (stop, fit) = idx.split_at(n_stop);
        (
            fit.iter().map(|&i| &samples[i]).collect(),
            stop.iter().map(|&i| &samples[i]).collect(),
        )
    } else {
        (train_idx.iter().map(|&i| &samples[i]).collect(), test.clone())
    };

    let window_len = samples[0].window_len();
    let model = build_model(spec, window_len, fold_seed)?;
    let tcfg = TrainConfig {
        seed: fold_seed,
        ..cfg.train
    };
    let outcome = train(model, &fit, &stop, &tcfg)?;
    let eval = evaluate(&outcome.model, &test)?;
    Ok((outcome.epochs_to_best, eval.accuracy, eval.loss))
}

/// Stratified k-fold cross-validation. Fold `f` trains a fresh model seeded
/// with `seed + f` on the other folds and scores it on fold `f`.
pub fn run_cv(samples: &[Sample], spec: &ModelSpec, cfg: &CvConfig, seed: u64) -> Result<Vec<FoldResult>> {
    if cfg.k < 2 {
        return Err(HarError::InvalidArgument(format!(
            "cross-validation needs at least 2 folds, got {}",
            cfg.k
        )));
    }
    if samples.is_empty() {
        return Err(HarError::InvalidArgument("no samples".into()));
    }
    let plan = make_folds(samples, cfg.k, seed)?;
    let one = |fold: usize| -> Result<FoldResult> {
        let fold_seed = seed.wrapping_add(fold as u64);
        let test_idx = plan.test_indices(fold);
        let train_idx = plan.train_indices(fold);
        log::info!(
            "fold {fold}: {} train / {} test samples",
            train_idx.len(),
            test_idx.len()
        );
        let (epochs_to_best, accuracy, loss) =
            run_fold(samples, &test_idx, &train_idx, spec, cfg, fold_seed).map_err(|e| HarError::Fold {
                fold,
                source: Box::new(e),
            })?;
        Ok(FoldResult {
            fold,
            accuracy,
            loss,
            epochs_to_best,
        })
    };
    if cfg.parallel {
        (0..cfg.k).into_par_iter().map(one).collect()
    } else {
        (0..cfg.k).map(one).collect()
    }
}
