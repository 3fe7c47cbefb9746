//! Human activity recognition from inertial signals with a small 1D CNN,
//! built to measure how classification quality depends on the length of the
//! observation window.
//!
//! The pipeline runs in five stages, one module each:
//!
//! - [`dataset`]: PAMAP2 parsing, channel selection, gap repair, activity
//!   filtering, and a seeded synthetic stand-in.
//! - [`preprocess`]: z-score normalization, overlapping windows, stratified
//!   fold assignment.
//! - [`nn`]: tensors, layers with hand-written backward passes, Adam, the
//!   two-conv network and its training loop.
//! - [`experiment`]: k-fold cross-validation and the window-size sweep.
//! - [`report`]: CSV tables and SVG box plots of a sweep.
//!
//! Everything is `f64` and deterministic for a given seed when run on a
//! single thread.

mod binio;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod preprocess;
pub mod report;

pub use error::{HarError, Result};

/// Sampling rate of every signal handled by this crate.
pub const SAMPLE_RATE_HZ: f64 = 100.0;

/// Channels kept per recording: three IMUs, each with a 3-axis accelerometer
/// and a 3-axis gyroscope.
pub const NUM_CHANNELS: usize = 18;

/// Number of activity classes.
pub const NUM_CLASSES: usize = 5;
