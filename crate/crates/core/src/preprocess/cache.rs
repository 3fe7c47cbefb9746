//! Windowed-sample cache file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "HARW1"
//! u64 sample count, u64 window length W, u64 channel count C
//! per sample:
//!   u64 class index, i64 subject id, u64 segment id, u64 start offset
//!   W x C f64 values, time-major
//! ```

use std::path::Path;

use crate::binio::{Reader, Writer};
use crate::nn::Tensor;
use crate::{HarError, Result};

use super::Sample;

pub const SAMPLES_MAGIC: &[u8; 5] = b"HARW1";

pub fn write_samples(path: &Path, samples: &[Sample]) -> Result<()> {
    let (w_len, channels) = samples
        .first()
        .map_or((0, 0), |s| (s.window_len(), s.channels()));
    let mut w = Writer::new(SAMPLES_MAGIC);
    w.usize(samples.len());
    w.usize(w_len);
    w.usize(channels);
    for s in samples {
        if s.window.shape() != [w_len, channels] {
            return Err(HarError::Shape(format!(
                "mixed window shapes {:?} and {:?}",
                s.window.shape(),
                [w_len, channels]
            )));
        }
        w.usize(s.class_index);
        w.i64(s.subject_id);
        w.usize(s.origin.0);
        w.usize(s.origin.1);
        w.f64s(s.window.data());
    }
    std::fs::write(path, w.buf).map_err(|e| HarError::io(path, e))
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>> {
    let bytes = std::fs::read(path).map_err(|e| HarError::io(path, e))?;
    let mut r = Reader::new(&bytes, SAMPLES_MAGIC)?;
    let n = r.usize()?;
    let w_len = r.usize()?;
    let channels = r.usize()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let class_index = r.usize()?;
        let subject_id = r.i64()?;
        let origin = (r.usize()?, r.usize()?);
        let window = Tensor::from_vec(&[w_len, channels], r.f64s(w_len * channels)?)?;
        out.push(Sample {
            window,
            class_index,
            subject_id,
            origin,
        });
    }
    r.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{filter_activities, generate_synthetic, ActivitySet};
    use crate::preprocess::{segment, WindowSpec};

    #[test]
    fn round_trip() {
        let sig = generate_synthetic(9, 1, 60).unwrap();
        let segs = filter_activities(&sig, &ActivitySet::locomotion());
        let samples = segment(&segs, &WindowSpec::from_len(25).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.harw");
        write_samples(&path, &samples).unwrap();
        assert_eq!(&std::fs::read(&path).unwrap()[..5], b"HARW1");
        assert_eq!(read_samples(&path).unwrap(), samples);
    }
}
