//! Binary container for a list of labeled signals.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "HARS1"
//! u64 signal count
//! per signal:
//!   i64 subject id, u64 channel count, u64 timesteps T
//!   T x i64 labels
//!   channel-major f64 values (channels x T)
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::binio::Reader;
use crate::{HarError, Result};

use super::LabeledSignal;

pub const DATASET_MAGIC: &[u8; 5] = b"HARS1";

fn encode_dataset_to<W: Write>(signals: &[LabeledSignal], out: &mut W) -> std::io::Result<()> {
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&(signals.len() as u64).to_le_bytes())?;
    for sig in signals {
        out.write_all(&sig.subject_id.to_le_bytes())?;
        out.write_all(&(sig.channels.len() as u64).to_le_bytes())?;
        out.write_all(&(sig.len() as u64).to_le_bytes())?;
        for &l in &sig.labels {
            out.write_all(&l.to_le_bytes())?;
        }
        for ch in &sig.channels {
            for v in ch {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
fn encode_dataset(signals: &[LabeledSignal]) -> Vec<u8> {
    let mut buf = Vec::new();
    encode_dataset_to(signals, &mut buf).expect("writing to memory");
    buf
}

pub(crate) fn decode_dataset(bytes: &[u8]) -> Result<Vec<LabeledSignal>> {
    let mut r = Reader::new(bytes, DATASET_MAGIC)?;
    let n = r.usize()?;
    let mut out = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let subject_id = r.i64()?;
        let n_channels = r.usize()?;
        let t = r.usize()?;
        let labels = (0..t).map(|_| r.i64()).collect::<Result<Vec<_>>>()?;
        let channels = (0..n_channels)
            .map(|_| r.f64s(t))
            .collect::<Result<Vec<_>>>()?;
        out.push(LabeledSignal::new(subject_id, channels, labels)?);
    }
    r.finish()?;
    Ok(out)
}

pub fn write_dataset(path: &Path, signals: &[LabeledSignal]) -> Result<()> {
    let file = File::create(path).map_err(|e| HarError::io(path, e))?;
    let mut out = BufWriter::new(file);
    encode_dataset_to(signals, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| HarError::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledSignal>> {
    let bytes = std::fs::read(path).map_err(|e| HarError::io(path, e))?;
    decode_dataset(&bytes)
}

/// SHA-256 of the dataset's binary encoding, hex.
pub fn fingerprint(signals: &[LabeledSignal]) -> String {
    let mut hasher = Sha256::new();
    encode_dataset_to(signals, &mut hasher).expect("hashing cannot fail");
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
