use crate::{HarError, Result};

use super::LabeledSignal;

/// Mapping from dataset activity codes to dense class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySet {
    codes: Vec<i64>,
    names: Vec<&'static str>,
}

impl ActivitySet {
    /// Sitting, standing, walking, ascending stairs, descending stairs.
    pub fn locomotion() -> Self {
        Self {
            codes: vec![2, 3, 4, 12, 13],
            names: vec![
                "sitting",
                "standing",
                "walking",
                "ascending stairs",
                "descending stairs",
            ],
        }
    }

    pub fn new(codes: Vec<i64>) -> Result<Self> {
        let mut sorted = codes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != codes.len() || codes.is_empty() {
            return Err(HarError::InvalidArgument(
                "activity codes must be non-empty and distinct".into(),
            ));
        }
        let names = vec![""; codes.len()];
        Ok(Self { codes, names })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn class_of(&self, code: i64) -> Option<usize> {
        self.codes.iter().position(|&c| c == code)
    }

    pub fn code_of(&self, class_index: usize) -> Option<i64> {
        self.codes.get(class_index).copied()
    }

    pub fn name_of(&self, class_index: usize) -> Option<&'static str> {
        self.names.get(class_index).copied()
    }

    pub fn codes(&self) -> &[i64] {
        &self.codes
    }
}

impl Default for ActivitySet {
    fn default() -> Self {
        Self::locomotion()
    }
}

/// A maximal run of timesteps with a single in-set activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySegment {
    pub subject_id: i64,
    pub class_index: usize,
    /// Timestep in the source signal where the run begins.
    pub start: usize,
    pub channels: Vec<Vec<f64>>,
}

impl ActivitySegment {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Split a signal into maximal single-activity runs, dropping every timestep
/// whose code is not in `acts`.
pub fn filter_activities(sig: &LabeledSignal, acts: &ActivitySet) -> Vec<ActivitySegment> {
    let mut out = Vec::new();
    let mut t = 0;
    let n = sig.labels.len();
    while t < n {
        let Some(class_index) = acts.class_of(sig.labels[t]) else {
            t += 1;
            continue;
        };
        let start = t;
        while t < n && sig.labels[t] == sig.labels[start] {
            t += 1;
        }
        out.push(ActivitySegment {
            subject_id: sig.subject_id,
            class_index,
            start,
            channels: sig.channels.iter().map(|ch| ch[start..t].to_vec()).collect(),
        });
    }
    out
}
