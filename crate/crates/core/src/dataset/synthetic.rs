//! Seeded stand-in for the real recordings so the whole pipeline can run
//! without the dataset.
//!
//! Class `c` is a bank of 18 sinusoids at `2 + 3c` Hz with a phase per
//! (class, channel), plus white Gaussian noise. Segments are emitted
//! class-interleaved (0, 1, 2, 3, 4, 0, 1, ...) so consecutive segments never
//! merge into one activity run.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{HarError, Result, NUM_CHANNELS, NUM_CLASSES, SAMPLE_RATE_HZ};

use super::{ActivitySet, LabeledSignal};

pub const SYNTHETIC_NOISE_STD: f64 = 0.3;

fn class_frequency_hz(class_index: usize) -> f64 {
    2.0 + 3.0 * class_index as f64
}

pub fn generate_synthetic(
    seed: u64,
    samples_per_class: usize,
    segment_len: usize,
) -> Result<LabeledSignal> {
    if segment_len < 2 {
        return Err(HarError::InvalidArgument(format!(
            "segment_len must be at least 2, got {segment_len}"
        )));
    }
    if samples_per_class < 1 {
        return Err(HarError::InvalidArgument(
            "samples_per_class must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<[f64; NUM_CHANNELS]> = (0..NUM_CLASSES)
        .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..TAU)))
        .collect();
    let noise = Normal::new(0.0, SYNTHETIC_NOISE_STD).expect("valid std");
    let acts = ActivitySet::locomotion();

    let total = NUM_CLASSES * samples_per_class * segment_len;
    let mut channels: Vec<Vec<f64>> = (0..NUM_CHANNELS).map(|_| Vec::with_capacity(total)).collect();
    let mut labels = Vec::with_capacity(total);
    for _ in 0..samples_per_class {
        for class in 0..NUM_CLASSES {
            let omega = TAU * class_frequency_hz(class) / SAMPLE_RATE_HZ;
            let code = acts.code_of(class).expect("five classes");
            for t in 0..segment_len {
                for (ch, out) in channels.iter_mut().enumerate() {
                    let clean = (omega * t as f64 + phases[class][ch]).sin();
                    out.push(clean + noise.sample(&mut rng));
                }
                labels.push(code);
            }
        }
    }
    LabeledSignal::new(0, channels, labels)
}
