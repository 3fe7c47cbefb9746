use serde::{Deserialize, Serialize};

use crate::dataset::{filter_activities, fingerprint, ActivitySegment, ActivitySet, LabeledSignal};
use crate::nn::{plan_shapes, ModelSpec, TrainConfig};
use crate::preprocess::{compute_stats_segments, normalize_segments, segment, WindowSpec};
use crate::{HarError, Result};

use super::cv::{run_cv, CvConfig, FoldResult, Normalization};

/// Kernel sizes per window: (3, 5) up to 0.25 s, (7, 11) above.
pub fn select_kernels(window_sec: f64) -> Result<[usize; 2]> {
    if !(window_sec > 0.0) {
        return Err(HarError::InvalidArgument(format!(
            "window duration must be positive, got {window_sec}"
        )));
    }
    Ok(if window_sec <= 0.25 { [3, 5] } else { [7, 11] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Window durations in seconds.
    pub windows: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub honest_split: bool,
    pub normalization: Normalization,
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            windows: vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0],
            folds: 8,
            seed: 42,
            train: TrainConfig::default(),
            honest_split: false,
            normalization: Normalization::Global,
            parallel: false,
        }
    }
}

impl SweepConfig {
    fn cv(&self) -> CvConfig {
        CvConfig {
            k: self.folds,
            train: self.train,
            honest_split: self.honest_split,
            normalization: self.normalization,
            parallel: self.parallel,
        }
    }
}

/// Means and sample standard deviations over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    pub acc_mean: f64,
    pub acc_std: f64,
    pub loss_mean: f64,
    pub loss_std: f64,
    pub epochs_mean: f64,
    pub epochs_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub window_sec: f64,
    pub window_len: usize,
    pub k1: usize,
    pub k2: usize,
    pub n_samples: usize,
    pub folds: Vec<FoldResult>,
    /// `None` when the row failed.
    pub metrics: Option<RowMetrics>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    /// SHA-256 of the input dataset.
    pub fingerprint: String,
    pub config: SweepConfig,
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Row with the highest mean accuracy (earliest on ties).
    pub fn best_row(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.metrics.is_some())
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.metrics.unwrap().acc_mean >= r.metrics.unwrap().acc_mean => Some(b),
                _ => Some(r),
            })
    }
}

/// Sample (n - 1) standard deviation; 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    // Shifting by the first value keeps identical inputs at exactly zero.
    let n = xs.len() as f64;
    let shift = xs[0];
    let mean = xs.iter().map(|x| x - shift).sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - shift - mean).powi(2)).sum::<f64>();
    (ss / (n - 1.0)).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn aggregate(folds: &[FoldResult]) -> Option<RowMetrics> {
    if folds.is_empty() {
        return None;
    }
    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let loss: Vec<f64> = folds.iter().map(|f| f.loss).collect();
    let epochs: Vec<f64> = folds.iter().map(|f| f.epochs_to_best as f64).collect();
    Some(RowMetrics {
        acc_mean: mean(&acc),
        acc_std: sample_std(&acc),
        loss_mean: mean(&loss),
        loss_std: sample_std(&loss),
        epochs_mean: mean(&epochs),
        epochs_std: sample_std(&epochs),
    })
}

fn run_window(segments: &[ActivitySegment], window_sec: f64, cfg: &SweepConfig) -> Result<SweepRow> {
    let spec = WindowSpec::from_seconds(window_sec)?;
    let [k1, k2] = select_kernels(window_sec)?;
    let mut row = SweepRow {
        window_sec,
        window_len: spec.window_len,
        k1,
        k2,
        n_samples: 0,
        folds: Vec::new(),
        metrics: None,
        failure: None,
    };
    let model_spec = ModelSpec::standard([k1, k2]);
    if let Err(e) = plan_shapes(&model_spec, spec.window_len) {
        row.failure = Some(e.to_string());
        return Ok(row);
    }
    let samples = segment(segments, &spec);
    row.n_samples = samples.len();
    log::info!(
        "window {window_sec} s: W = {}, stride {}, {} samples, kernels ({k1}, {k2})",
        spec.window_len,
        spec.stride,
        samples.len()
    );
    match run_cv(&samples, &model_spec, &cfg.cv(), cfg.seed) {
        Ok(folds) => {
            row.metrics = aggregate(&folds);
            row.folds = folds;
        }
        Err(e @ (HarError::InsufficientSamples { .. } | HarError::InvalidArgument(_))) => {
            row.failure = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Five-activity segments of every signal, z-scored over all of them when
/// `normalization` is global.
pub fn prepare_segments(dataset: &[LabeledSignal], normalization: Normalization) -> Result<Vec<ActivitySegment>> {
    let acts = ActivitySet::locomotion();
    let mut segments: Vec<ActivitySegment> = dataset
        .iter()
        .flat_map(|sig| filter_activities(sig, &acts))
        .collect();
    if segments.is_empty() {
        return Err(HarError::InvalidArgument(
            "dataset contains none of the target activities".into(),
        ));
    }
    if normalization == Normalization::Global {
        let stats = compute_stats_segments(&segments)?;
        normalize_segments(&mut segments, &stats);
    }
    Ok(segments)
}

/// The full protocol: filter to the five activities, normalize, then for
/// each window length segment, cross-validate, and aggregate. Rows whose
/// architecture or fold plan is infeasible are marked failed instead of
/// aborting the sweep.
pub fn run_sweep(dataset: &[LabeledSignal], cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.windows.is_empty() || cfg.windows.iter().any(|w| !(*w > 0.0)) {
        return Err(HarError::InvalidArgument(
            "window list must be non-empty and positive".into(),
        ));
    }
    if cfg.folds < 2 {
        return Err(HarError::InvalidArgument(format!(
            "cross-validation needs at least 2 folds, got {}",
            cfg.folds
        )));
    }
    let segments = prepare_segments(dataset, cfg.normalization)?;

    let mut windows = cfg.windows.clone();
    windows.sort_by(f64::total_cmp);
    windows.dedup();
    let rows = windows
        .iter()
        .map(|&w| run_window(&segments, w, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        rows,
        seed: cfg.seed,
        fingerprint: fingerprint(dataset),
        config: cfg.clone(),
    })
}
