use std::fmt::Write as _;
use std::path::Path;

use crate::experiment::SweepReport;
use crate::{HarError, Result};

pub const CSV_HEADER: &str = "window_sec,k1,k2,acc_mean,acc_std,loss_mean,loss_std,epochs_mean,epochs_std";

/// Accuracy in percent with 2 decimals, loss with 3, epochs with 1. Failed
/// rows carry `NA` in every metric column.
pub fn render_report_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut rows: Vec<_> = report.rows.iter().collect();
    rows.sort_by(|a, b| a.window_sec.total_cmp(&b.window_sec));
    for row in rows {
        let _ = write!(out, "{},{},{},", row.window_sec, row.k1, row.k2);
        match &row.metrics {
            Some(m) => {
                let _ = write!(
                    out,
                    "{:.2},{:.2},{:.3},{:.3},{:.1},{:.1}",
                    m.acc_mean * 100.0,
                    m.acc_std * 100.0,
                    m.loss_mean,
                    m.loss_std,
                    m.epochs_mean,
                    m.epochs_std
                );
            }
            None => out.push_str("NA,NA,NA,NA,NA,NA"),
        }
        out.push('\n');
    }
    out
}

pub fn write_report_csv(report: &SweepReport, path: &Path) -> Result<()> {
    std::fs::write(path, render_report_csv(report)).map_err(|e| HarError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{RowMetrics, SweepConfig, SweepRow};

    fn report(rows: Vec<SweepRow>) -> SweepReport {
        SweepReport {
            rows,
            seed: 42,
            fingerprint: String::new(),
            config: SweepConfig::default(),
        }
    }

    fn row(window_sec: f64, metrics: Option<RowMetrics>) -> SweepRow {
        let (k1, k2) = if window_sec <= 0.25 { (3, 5) } else { (7, 11) };
        SweepRow {
            window_sec,
            window_len: (window_sec * 100.0).round() as usize,
            k1,
            k2,
            n_samples: 0,
            folds: Vec::new(),
            failure: metrics.is_none().then(|| "boom".to_string()),
            metrics,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(render_report_csv(&report(vec![])), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn zero_variance_row() {
        let m = RowMetrics {
            acc_mean: 0.9995,
            acc_std: 0.0,
            loss_mean: 0.003,
            loss_std: 0.0,
            epochs_mean: 350.0,
            epochs_std: 0.0,
        };
        let csv = render_report_csv(&report(vec![row(0.5, Some(m))]));
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "99.95");
        assert_eq!(fields[4], "0.00");
    }

    #[test]
    fn row_rounds_to_printed_precision() {
        let m = RowMetrics {
            acc_mean: 0.9995,
            acc_std: 0.00083,
            loss_mean: 0.003,
            loss_std: 0.004,
            epochs_mean: 350.0,
            epochs_std: 267.0,
        };
        let csv = render_report_csv(&report(vec![row(0.5, Some(m))]));
        assert_eq!(csv.lines().nth(1).unwrap(), "0.5,7,11,99.95,0.08,0.003,0.004,350.0,267.0");
    }

    #[test]
    fn rows_sorted_and_failures_na() {
        let csv = render_report_csv(&report(vec![row(4.0, None), row(0.1, None)]));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "0.1,3,5,NA,NA,NA,NA,NA,NA");
        assert_eq!(lines[2], "4,7,11,NA,NA,NA,NA,NA,NA");
    }
}
