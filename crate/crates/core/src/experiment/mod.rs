//! Cross-validation and the window-length sweep.

mod cv;
mod single;
mod sweep;

pub use cv::{run_cv, CvConfig, FoldResult, Normalization};
pub use single::{train_single, SingleRun, SingleRunConfig};
pub use sweep::{aggregate, prepare_segments, run_sweep, sample_std, select_kernels, RowMetrics, SweepConfig, SweepReport, SweepRow};
