//! Model checkpoint file.
//!
//! Layout, all integers little-endian `u64` unless noted:
//!
//! ```text
//! "HARM1"
//! spec: in_channels, filters[2], kernels[2], pool_width, hidden[2], classes,
//!       dropout (f64)
//! plan: window_len, conv1_len, pool1_len, conv2_len, pool2_len,
//!       pool1_applied (u8), pool2_applied (u8), flatten
//! 10 tensors in declaration order (conv1 w/b, conv2 w/b, dense1 w/b,
//!   dense2 w/b, output w/b), each: u64 value count, then f64 values
//! ```

use std::path::Path;

use crate::binio::{Reader, Writer};
use crate::{HarError, Result};

use super::model::{plan_shapes, ModelParams, ModelSpec};

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"HARM1";

pub fn encode_model(model: &ModelParams) -> Vec<u8> {
    let s = &model.spec;
    let p = &model.plan;
    let mut w = Writer::new(CHECKPOINT_MAGIC);
    for v in [
        s.in_channels,
        s.filters[0],
        s.filters[1],
        s.kernels[0],
        s.kernels[1],
        s.pool_width,
        s.hidden[0],
        s.hidden[1],
        s.classes,
    ] {
        w.usize(v);
    }
    w.f64(s.dropout);
    for v in [p.window_len, p.conv1_len, p.pool1_len, p.conv2_len, p.pool2_len] {
        w.usize(v);
    }
    w.u8(p.pool1_applied as u8);
    w.u8(p.pool2_applied as u8);
    w.usize(p.flatten);
    for t in model.tensors() {
        w.usize(t.len());
        w.f64s(t.data());
    }
    w.buf
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader::new(bytes, CHECKPOINT_MAGIC)?;
    let mut dims = [0usize; 9];
    for d in &mut dims {
        *d = r.usize()?;
    }
    let spec = ModelSpec {
        in_channels: dims[0],
        filters: [dims[1], dims[2]],
        kernels: [dims[3], dims[4]],
        pool_width: dims[5],
        hidden: [dims[6], dims[7]],
        classes: dims[8],
        dropout: r.f64()?,
    };
    let window_len = r.usize()?;
    let stored = [r.usize()?, r.usize()?, r.usize()?, r.usize()?];
    let flags = [r.u8()? != 0, r.u8()? != 0];
    let flatten = r.usize()?;
    let plan = plan_shapes(&spec, window_len)?;
    if stored != [plan.conv1_len, plan.pool1_len, plan.conv2_len, plan.pool2_len]
        || flags != [plan.pool1_applied, plan.pool2_applied]
        || flatten != plan.flatten
    {
        return Err(HarError::Format(
            "stored shape plan disagrees with the model spec".into(),
        ));
    }
    let mut model = ModelParams::zeros(spec, plan);
    for t in model.tensors_mut() {
        let n = r.usize()?;
        if n != t.len() {
            return Err(HarError::Format(format!(
                "tensor of shape {:?} stored with {n} values",
                t.shape()
            )));
        }
        t.data_mut().copy_from_slice(&r.f64s(n)?);
    }
    r.finish()?;
    Ok(model)
}

pub fn save_model(path: &Path, model: &ModelParams) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| HarError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| HarError::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::build_model;

    #[test]
    fn round_trips_bit_exactly() {
        let m = build_model(&ModelSpec::standard([3, 5]), 10, 8).unwrap();
        let bytes = encode_model(&m);
        assert_eq!(&bytes[..5], b"HARM1");
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_model(&back), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let m = build_model(&ModelSpec::standard([7, 11]), 50, 8).unwrap();
        let bytes = encode_model(&m);
        assert!(decode_model(&bytes[..bytes.len() - 1]).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode_model(&longer).is_err());
        assert!(decode_model(b"HARS1").is_err());
    }
}
