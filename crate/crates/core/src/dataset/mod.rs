//! Loading and cleaning of inertial recordings.
//!
//! Missing readings are carried as `NaN` inside [`LabeledSignal`] until
//! [`interpolate_missing`] repairs them; [`RawRecording`] keeps them as
//! `None` so that parsing never confuses a dropout with a measured value.

mod activity;
mod pamap2;
mod repair;
mod store;
mod synthetic;

pub use activity::{filter_activities, ActivitySegment, ActivitySet};
pub use pamap2::{
    load_pamap2_dir, parse_pamap2_file, select_channels, RawRecording, RawRow, FILE_COLUMNS,
    IMU_OFFSETS, READINGS_PER_ROW,
};
pub use repair::interpolate_missing;
pub use store::{fingerprint, read_dataset, write_dataset, DATASET_MAGIC};
pub use synthetic::{generate_synthetic, SYNTHETIC_NOISE_STD};

use crate::{HarError, Result, NUM_CHANNELS, SAMPLE_RATE_HZ};

/// A multichannel signal with one activity code per timestep.
///
/// `channels[c][t]` is channel `c` at timestep `t`. `NaN` marks a missing
/// reading.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub subject_id: i64,
    pub channels: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
}

impl LabeledSignal {
    pub fn new(subject_id: i64, channels: Vec<Vec<f64>>, labels: Vec<i64>) -> Result<Self> {
        if channels.len() != NUM_CHANNELS {
            return Err(HarError::Shape(format!(
                "expected {NUM_CHANNELS} channels, got {}",
                channels.len()
            )));
        }
        if let Some((c, ch)) = channels
            .iter()
            .enumerate()
            .find(|(_, ch)| ch.len() != labels.len())
        {
            return Err(HarError::Shape(format!(
                "channel {c} has {} timesteps but there are {} labels",
                ch.len(),
                labels.len()
            )));
        }
        Ok(Self {
            subject_id,
            channels,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        SAMPLE_RATE_HZ
    }

    pub fn has_missing(&self) -> bool {
        self.channels.iter().flatten().any(|v| v.is_nan())
    }
}

/// Parse, select, repair: the full path from a subject file to a clean
/// 18-channel signal.
pub fn load_signal(text: &str, subject_id: i64) -> Result<LabeledSignal> {
    let raw = parse_pamap2_file(text, subject_id)?;
    interpolate_missing(select_channels(&raw)?)
}
