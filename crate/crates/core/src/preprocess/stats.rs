use serde::{Deserialize, Serialize};

use crate::dataset::{ActivitySegment, LabeledSignal};
use crate::{HarError, Result};

use super::Sample;

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelStats {
    pub fn identity(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, channel: usize, x: f64) -> f64 {
        (x - self.mean[channel]) / self.std[channel]
    }

    pub fn denormalize(&self, channel: usize, z: f64) -> f64 {
        z * self.std[channel] + self.mean[channel]
    }
}

/// Two-pass mean/variance over a set of chunks per channel.
fn stats_over<'a, F, I>(channels: usize, chunks: F) -> Result<ChannelStats>
where
    F: Fn(usize) -> I,
    I: Iterator<Item = &'a [f64]>,
{
    if channels == 0 {
        return Err(HarError::InvalidArgument("no channels".into()));
    }
    let mut mean = Vec::with_capacity(channels);
    let mut std = Vec::with_capacity(channels);
    for c in 0..channels {
        let (sum, n) = chunks(c).fold((0.0, 0usize), |(s, n), xs| {
            (s + xs.iter().sum::<f64>(), n + xs.len())
        });
        if n < 2 {
            return Err(HarError::InvalidArgument(format!(
                "need at least 2 timesteps for statistics, got {n}"
            )));
        }
        let m = sum / n as f64;
        let ss: f64 = chunks(c)
            .map(|xs| xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>())
            .sum();
        let s = (ss / n as f64).sqrt();
        if !(s > 0.0) {
            return Err(HarError::ConstantChannel { channel: c });
        }
        mean.push(m);
        std.push(s);
    }
    Ok(ChannelStats { mean, std })
}

/// Statistics over the concatenation of every timestep of every signal.
pub fn compute_stats(signals: &[LabeledSignal]) -> Result<ChannelStats> {
    let channels = signals.first().map_or(0, |s| s.channels.len());
    stats_over(channels, |c| signals.iter().map(move |s| s.channels[c].as_slice()))
}

pub fn compute_stats_segments(segments: &[ActivitySegment]) -> Result<ChannelStats> {
    let channels = segments.first().map_or(0, |s| s.channels.len());
    stats_over(channels, |c| segments.iter().map(move |s| s.channels[c].as_slice()))
}

/// Statistics over the windows of `samples`; overlapping timesteps count once
/// per window they appear in.
pub fn compute_stats_samples(samples: &[&Sample]) -> Result<ChannelStats> {
    let channels = samples.first().map_or(0, |s| s.channels());
    let columns: Vec<Vec<f64>> = (0..channels)
        .map(|c| samples.iter().flat_map(|s| s.channel(c)).collect())
        .collect();
    stats_over(channels, |c| std::iter::once(columns[c].as_slice()))
}

pub fn apply_zscore(mut sig: LabeledSignal, stats: &ChannelStats) -> LabeledSignal {
    normalize_channels(&mut sig.channels, stats);
    sig
}

pub fn normalize_segments(segments: &mut [ActivitySegment], stats: &ChannelStats) {
    for seg in segments {
        normalize_channels(&mut seg.channels, stats);
    }
}

pub fn normalize_samples(samples: &mut [Sample], stats: &ChannelStats) {
    for s in samples {
        let c = s.channels();
        for (i, v) in s.window.data_mut().iter_mut().enumerate() {
            *v = stats.normalize(i % c, *v);
        }
    }
}

fn normalize_channels(channels: &mut [Vec<f64>], stats: &ChannelStats) {
    for (c, ch) in channels.iter_mut().enumerate() {
        for v in ch.iter_mut() {
            *v = stats.normalize(c, *v);
        }
    }
}
