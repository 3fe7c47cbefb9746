//! PAMAP2 protocol files.
//!
//! One file per subject (`subject101.dat` ... `subject109.dat`), one sample
//! per line, 54 whitespace-separated fields, `NaN` for missing values:
//!
//! | columns | content                        |
//! |---------|--------------------------------|
//! | 0       | timestamp (s)                  |
//! | 1       | activity id                    |
//! | 2       | heart rate (bpm)               |
//! | 3-19    | IMU on the dominant-side hand  |
//! | 20-36   | IMU on the chest               |
//! | 37-53   | IMU on the dominant-side ankle |
//!
//! Within a 17-column IMU block at offset `o`: `o` temperature, `o+1..=o+3`
//! accelerometer (±16 g), `o+4..=o+6` accelerometer (±6 g, saturates),
//! `o+7..=o+9` gyroscope, `o+10..=o+12` magnetometer, `o+13..=o+16`
//! orientation (invalid in this release).

use std::fmt::Write as _;
use std::path::Path;

use crate::{HarError, Result, NUM_CHANNELS};

use super::{interpolate_missing, LabeledSignal};

pub const FILE_COLUMNS: usize = 54;
/// Sensor readings per row: every column except timestamp and activity id.
pub const READINGS_PER_ROW: usize = FILE_COLUMNS - 2;
/// File column where each IMU block starts, in file order (hand, chest, ankle).
pub const IMU_OFFSETS: [usize; 3] = [3, 20, 37];

const ACC16_OFFSET: usize = 1;
const GYRO_OFFSET: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub timestamp: f64,
    pub activity_id: i64,
    /// File columns 2..54; `None` where the file says `NaN`.
    pub values: [Option<f64>; READINGS_PER_ROW],
}

/// One subject's parsed recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub subject_id: i64,
    pub rows: Vec<RawRow>,
}

impl RawRecording {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Write back in the protocol-file layout. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_pamap2_string(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = write!(out, "{} {}", row.timestamp, row.activity_id);
            for v in &row.values {
                match v {
                    Some(x) => {
                        let _ = write!(out, " {x}");
                    }
                    None => out.push_str(" NaN"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> HarError {
    HarError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn parse_activity(field: &str, line: usize) -> Result<i64> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Ok(v as i64),
        _ => Err(malformed(line, format!("bad activity id {field:?}"))),
    }
}

/// Parse one subject's protocol file. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_pamap2_file(text: &str, subject_id: i64) -> Result<RawRecording> {
    let mut rows = Vec::new();
    let mut fields = Vec::with_capacity(FILE_COLUMNS);
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        fields.clear();
        fields.extend(line.split_whitespace());
        if fields.is_empty() {
            continue;
        }
        if fields.len() != FILE_COLUMNS {
            return Err(malformed(
                lineno,
                format!("expected {FILE_COLUMNS} fields, found {}", fields.len()),
            ));
        }
        let timestamp: f64 = fields[0]
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite())
            .ok_or_else(|| malformed(lineno, format!("bad timestamp {:?}", fields[0])))?;
        if let Some(prev) = rows.last().map(|r: &RawRow| r.timestamp) {
            if timestamp <= prev {
                return Err(malformed(lineno, "timestamp not increasing"));
            }
        }
        let activity_id = parse_activity(fields[1], lineno)?;
        let mut values = [None; READINGS_PER_ROW];
        for (slot, field) in values.iter_mut().zip(&fields[2..]) {
            let v: f64 = field
                .parse()
                .map_err(|_| malformed(lineno, format!("unparsable number {field:?}")))?;
            if v.is_nan() {
                continue;
            }
            if !v.is_finite() {
                return Err(malformed(lineno, format!("non-finite reading {field:?}")));
            }
            *slot = Some(v);
        }
        rows.push(RawRow {
            timestamp,
            activity_id,
            values,
        });
    }
    if rows.is_empty() {
        return Err(HarError::EmptyRecording);
    }
    Ok(RawRecording { subject_id, rows })
}

/// File columns of the 18 kept channels, in output order.
fn selected_columns() -> impl Iterator<Item = usize> {
    IMU_OFFSETS.into_iter().flat_map(|o| {
        (0..3)
            .map(move |a| o + ACC16_OFFSET + a)
            .chain((0..3).map(move |a| o + GYRO_OFFSET + a))
    })
}

/// Keep the ±16 g accelerometer and gyroscope axes of each IMU.
pub fn select_channels(rec: &RawRecording) -> Result<LabeledSignal> {
    if rec.is_empty() {
        return Err(HarError::EmptyRecording);
    }
    let channels: Vec<Vec<f64>> = selected_columns()
        .map(|col| {
            rec.rows
                .iter()
                .map(|r| r.values[col - 2].unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    debug_assert_eq!(channels.len(), NUM_CHANNELS);
    let labels = rec.rows.iter().map(|r| r.activity_id).collect();
    LabeledSignal::new(rec.subject_id, channels, labels)
}

/// Subject id from a file name like `subject105.dat`.
fn subject_of(path: &Path) -> Option<i64> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix("subject")?
        .strip_suffix(".dat")?
        .parse()
        .ok()
}

/// Load every `subjectNNN.dat` in `dir` (optionally restricted to
/// `subjects`), sorted by subject id, as repaired 18-channel signals.
pub fn load_pamap2_dir(dir: &Path, subjects: Option<&[i64]>) -> Result<Vec<LabeledSignal>> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarError::io(dir, e))?.path();
        if let Some(id) = subject_of(&path) {
            if subjects.is_none_or(|s| s.contains(&id)) {
                files.push((id, path));
            }
        }
    }
    if files.is_empty() {
        return Err(HarError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no subjectNNN.dat files"),
        ));
    }
    files.sort();
    files
        .iter()
        .map(|(id, path)| {
            log::info!("loading {}", path.display());
            let text = std::fs::read_to_string(path).map_err(|e| HarError::io(path, e))?;
            let raw = parse_pamap2_file(&text, *id)?;
            interpolate_missing(select_channels(&raw)?)
        })
        .collect()
}
