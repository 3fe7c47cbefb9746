//! From clean signals to training samples: normalization, windowing, folds.

mod cache;
mod folds;
mod stats;
mod window;

pub use cache::{read_samples, write_samples, SAMPLES_MAGIC};
pub use folds::{make_folds, FoldPlan};
pub use stats::{
    apply_zscore, compute_stats, compute_stats_samples, compute_stats_segments, normalize_samples,
    normalize_segments, ChannelStats,
};
pub use window::{segment, Sample, WindowSpec};
