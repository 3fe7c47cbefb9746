use crate::{HarError, Result};

use super::LabeledSignal;

/// Fill `NaN` gaps channel by channel: interior gaps linearly between the
/// nearest valid neighbours, leading and trailing gaps with the nearest
/// valid value.
pub fn interpolate_missing(mut sig: LabeledSignal) -> Result<LabeledSignal> {
    for (c, ch) in sig.channels.iter_mut().enumerate() {
        fill_channel(ch).ok_or(HarError::AllMissingChannel { channel: c })?;
    }
    Ok(sig)
}

/// Returns `None` when the channel has no valid value at all.
fn fill_channel(ch: &mut [f64]) -> Option<()> {
    if !ch.iter().any(|v| v.is_nan()) {
        return Some(());
    }
    let first = ch.iter().position(|v| !v.is_nan())?;
    let last = ch.iter().rposition(|v| !v.is_nan())?;

    let lead = ch[first];
    ch[..first].fill(lead);
    let trail = ch[last];
    ch[last + 1..].fill(trail);

    let mut left = first;
    for t in first + 1..=last {
        if ch[t].is_nan() {
            continue;
        }
        if t > left + 1 {
            let (a, b) = (ch[left], ch[t]);
            let span = (t - left) as f64;
            for (j, slot) in ch[left + 1..t].iter_mut().enumerate() {
                let frac = (j + 1) as f64 / span;
                *slot = a + (b - a) * frac;
            }
        }
        left = t;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NUM_CHANNELS;

    const M: f64 = f64::NAN;

    fn filled(v: &[f64]) -> Vec<f64> {
        let mut v = v.to_vec();
        fill_channel(&mut v).unwrap();
        v
    }

    #[test]
    fn interior_gap_is_linear() {
        assert_eq!(filled(&[1.0, M, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(filled(&[0.0, M, M, 3.0]), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn edges_take_nearest_value() {
        assert_eq!(filled(&[M, M, 5.0, 7.0]), vec![5.0, 5.0, 5.0, 7.0]);
        assert_eq!(filled(&[5.0, 7.0, M]), vec![5.0, 7.0, 7.0]);
    }

    #[test]
    fn complete_channel_is_untouched() {
        assert_eq!(filled(&[4.0, 4.0, 4.0]), vec![4.0, 4.0, 4.0]);
    }

    #[test]
    fn all_missing_channel_is_named() {
        let mut channels = vec![vec![1.0, 2.0]; NUM_CHANNELS];
        channels[9] = vec![M, M];
        let sig = LabeledSignal::new(0, channels, vec![2, 2]).unwrap();
        let err = interpolate_missing(sig).unwrap_err();
        assert!(matches!(err, HarError::AllMissingChannel { channel: 9 }));
    }

    #[test]
    fn idempotent() {
        let mut channels = vec![vec![1.0, M, 2.0, M, M, 8.0, M]; NUM_CHANNELS];
        channels[3] = vec![M, 0.25, M, M, M, M, 1.0];
        let sig = LabeledSignal::new(0, channels, vec![2; 7]).unwrap();
        let once = interpolate_missing(sig).unwrap();
        assert!(!once.has_missing());
        let twice = interpolate_missing(once.clone()).unwrap();
        assert_eq!(once, twice);
    }
}
