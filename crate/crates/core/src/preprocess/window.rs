use serde::{Deserialize, Serialize};

use crate::dataset::ActivitySegment;
use crate::nn::Tensor;
use crate::{HarError, Result, SAMPLE_RATE_HZ};

/// Window length and hop, in timesteps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_len: usize,
    pub stride: usize,
}

impl WindowSpec {
    /// `round(seconds * 100)` timesteps with a hop of a quarter window
    /// (rounded down, at least 1), i.e. at least 75% overlap.
    pub fn from_seconds(seconds: f64) -> Result<Self> {
        if !(seconds > 0.0) || !seconds.is_finite() {
            return Err(HarError::InvalidArgument(format!(
                "window duration must be positive, got {seconds}"
            )));
        }
        Self::from_len((seconds * SAMPLE_RATE_HZ).round() as usize)
    }

    pub fn from_len(window_len: usize) -> Result<Self> {
        if window_len < 2 {
            return Err(HarError::InvalidArgument(format!(
                "window must span at least 2 timesteps, got {window_len}"
            )));
        }
        Ok(Self {
            window_len,
            stride: (window_len / 4).max(1),
        })
    }

    pub fn overlap(&self) -> usize {
        self.window_len - self.stride
    }

    /// Windows that fit in a run of `len` timesteps.
    pub fn count_in(&self, len: usize) -> usize {
        if len < self.window_len {
            0
        } else {
            (len - self.window_len) / self.stride + 1
        }
    }
}

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Time-major `[W, channels]`.
    pub window: Tensor,
    pub class_index: usize,
    pub subject_id: i64,
    /// (segment id, start offset within the segment)
    pub origin: (usize, usize),
}

impl Sample {
    pub fn window_len(&self) -> usize {
        self.window.dim(0)
    }

    pub fn channels(&self) -> usize {
        self.window.dim(1)
    }

    pub fn channel(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.window.data().iter().skip(c).step_by(self.channels()).copied()
    }
}

/// Cut each segment into overlapping windows. Windows never cross a
/// segment boundary; segment ids are positions in `segments`.
pub fn segment(segments: &[ActivitySegment], spec: &WindowSpec) -> Vec<Sample> {
    let w = spec.window_len;
    let mut out = Vec::new();
    for (id, seg) in segments.iter().enumerate() {
        let channels = seg.channels.len();
        for n in 0..spec.count_in(seg.len()) {
            let start = n * spec.stride;
            let mut data = Vec::with_capacity(w * channels);
            for t in start..start + w {
                data.extend(seg.channels.iter().map(|ch| ch[t]));
            }
            out.push(Sample {
                window: Tensor::from_vec(&[w, channels], data).expect("window shape"),
                class_index: seg.class_index,
                subject_id: seg.subject_id,
                origin: (id, start),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_segment(len: usize, class_index: usize) -> ActivitySegment {
        ActivitySegment {
            subject_id: 3,
            class_index,
            start: 0,
            channels: (0..2)
                .map(|c| (0..len).map(|t| (c * 10_000 + t) as f64).collect())
                .collect(),
        }
    }

    #[test]
    fn sweep_lengths() {
        let lens: Vec<(usize, usize)> = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&s| {
                let w = WindowSpec::from_seconds(s).unwrap();
                (w.window_len, w.stride)
            })
            .collect();
        assert_eq!(
            lens,
            vec![(10, 2), (25, 6), (50, 12), (100, 25), (200, 50), (400, 100)]
        );
    }

    #[test]
    fn rejects_tiny_windows() {
        assert!(WindowSpec::from_seconds(0.0).is_err());
        assert!(WindowSpec::from_seconds(-1.0).is_err());
        assert!(WindowSpec::from_seconds(0.01).is_err());
    }

    #[test]
    fn window_count_formula() {
        let spec = WindowSpec { window_len: 50, stride: 12 };
        assert_eq!(segment(&[ramp_segment(1000, 0)], &spec).len(), 80);
        assert_eq!(segment(&[ramp_segment(50, 0)], &spec).len(), 1);
        assert_eq!(segment(&[ramp_segment(49, 0)], &spec).len(), 0);
    }

    #[test]
    fn windows_copy_the_right_timesteps() {
        let spec = WindowSpec::from_len(4).unwrap();
        let samples = segment(&[ramp_segment(7, 0), ramp_segment(5, 4)], &spec);
        assert_eq!(samples.len(), 4 + 2);
        let s = &samples[1];
        assert_eq!(s.origin, (0, 1));
        assert_eq!(s.channel(0).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.channel(1).next(), Some(10_001.0));
        assert_eq!(samples[5].origin, (1, 1));
        assert_eq!(samples[5].class_index, 4);
        assert_eq!(samples[5].subject_id, 3);
    }
}
