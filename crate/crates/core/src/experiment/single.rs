use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSignal;
use crate::nn::{build_model, evaluate, train, EpochRecord, ModelParams, ModelSpec, TrainConfig};
use crate::preprocess::{compute_stats_samples, make_folds, normalize_samples, segment, Sample, WindowSpec};
use crate::Result;

use super::cv::Normalization;
use super::sweep::{prepare_segments, select_kernels};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRunConfig {
    pub window_sec: f64,
    /// Defaults to the kernel rule for the window.
    pub kernels: Option<[usize; 2]>,
    /// The split holds out one of this many stratified folds.
    pub holdout_folds: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub normalization: Normalization,
}

impl Default for SingleRunConfig {
    fn default() -> Self {
        Self {
            window_sec: 0.5,
            kernels: None,
            holdout_folds: 5,
            seed: 42,
            train: TrainConfig::default(),
            normalization: Normalization::Global,
        }
    }
}

/// Summary of one train/held-out split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleRun {
    pub window_sec: f64,
    pub window_len: usize,
    pub kernels: [usize; 2],
    pub n_train: usize,
    pub n_holdout: usize,
    pub epochs_to_best: usize,
    pub epochs_run: usize,
    pub holdout_accuracy: f64,
    pub holdout_loss: f64,
    pub history: Vec<EpochRecord>,
    #[serde(skip)]
    pub model: Option<ModelParams>,
}

/// Train one model on a single stratified split: fold 0 of
/// `holdout_folds` is held out and also drives early stopping.
pub fn train_single(dataset: &[LabeledSignal], cfg: &SingleRunConfig) -> Result<SingleRun> {
    let segments = prepare_segments(dataset, cfg.normalization)?;
    let spec = WindowSpec::from_seconds(cfg.window_sec)?;
    let kernels = match cfg.kernels {
        Some(k) => k,
        None => select_kernels(cfg.window_sec)?,
    };
    let model_spec = ModelSpec::standard(kernels);
    let mut samples = segment(&segments, &spec);
    let plan = make_folds(&samples, cfg.holdout_folds.max(2), cfg.seed)?;
    let (test_idx, train_idx) = (plan.test_indices(0), plan.train_indices(0));
    if cfg.normalization == Normalization::PerFold {
        let refs: Vec<&Sample> = train_idx.iter().map(|&i| &samples[i]).collect();
        let stats = compute_stats_samples(&refs)?;
        normalize_samples(&mut samples, &stats);
    }
    let holdout: Vec<&Sample> = test_idx.iter().map(|&i| &samples[i]).collect();
    let fit: Vec<&Sample> = train_idx.iter().map(|&i| &samples[i]).collect();

    let model = build_model(&model_spec, spec.window_len, cfg.seed)?;
    let tcfg = TrainConfig {
        seed: cfg.seed,
        ..cfg.train
    };
    let outcome = train(model, &fit, &holdout, &tcfg)?;
    let eval = evaluate(&outcome.model, &holdout)?;
    Ok(SingleRun {
        window_sec: cfg.window_sec,
        window_len: spec.window_len,
        kernels,
        n_train: fit.len(),
        n_holdout: holdout.len(),
        epochs_to_best: outcome.epochs_to_best,
        epochs_run: outcome.history.len(),
        holdout_accuracy: eval.accuracy,
        holdout_loss: eval.loss,
        history: outcome.history,
        model: Some(outcome.model),
    })
}
