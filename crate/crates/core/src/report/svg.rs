//! Box plots of per-fold metrics, one box per window length.
//!
//! Boxes span the first to third quartile with a line at the median;
//! whiskers reach the minimum and maximum. Quartiles use linear
//! interpolation between order statistics (position `p * (n - 1)`).

use std::fmt::Write as _;
use std::path::Path;

use crate::experiment::SweepReport;
use crate::{HarError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Loss,
    Epochs,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy (%)",
            Metric::Loss => "Cross-entropy loss",
            Metric::Epochs => "Epochs to best",
        }
    }

    pub fn file_stem(&self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Loss => "loss",
            Metric::Epochs => "epochs",
        }
    }

    /// Per-window fold values for every row that completed.
    pub fn distributions(&self, report: &SweepReport) -> Vec<(f64, Vec<f64>)> {
        report
            .rows
            .iter()
            .filter(|r| r.metrics.is_some())
            .map(|r| {
                let values = r
                    .folds
                    .iter()
                    .map(|f| match self {
                        Metric::Accuracy => f.accuracy * 100.0,
                        Metric::Loss => f.loss,
                        Metric::Epochs => f.epochs_to_best as f64,
                    })
                    .collect();
                (r.window_sec, values)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn quartiles(values: &[f64]) -> Result<BoxStats> {
    if values.len() < 2 {
        return Err(HarError::InvalidArgument(format!(
            "box plot needs at least 2 values, got {}",
            values.len()
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(BoxStats {
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const Y_TICKS: usize = 5;

pub fn render_boxplot_svg(distributions: &[(f64, Vec<f64>)], metric_name: &str) -> Result<String> {
    let boxes = distributions
        .iter()
        .map(|(w, vals)| {
            quartiles(vals)
                .map(|b| (*w, b))
                .map_err(|e| HarError::InvalidArgument(format!("window {w} s: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut lo, mut hi) = boxes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, b)| {
            (lo.min(b.min), hi.max(b.max))
        });
    if boxes.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.05 } else { 0.5 };
        lo -= pad;
        hi += pad;
    } else {
        let pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y_of = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);
    let slot = plot_w / boxes.len().max(1) as f64;
    let half = (slot * 0.3).min(30.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let x0 = LEFT;
    let y0 = TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{TOP:.2}" x2="{x0:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        LEFT + plot_w
    );
    for i in 0..=Y_TICKS {
        let v = lo + (hi - lo) * i as f64 / Y_TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            format_tick(v, hi - lo)
        );
    }

    for (i, (w, b)) in boxes.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let (ymin, yq1, ymed, yq3, ymax) = (y_of(b.min), y_of(b.q1), y_of(b.median), y_of(b.q3), y_of(b.max));
        let _ = writeln!(s, r#"<g class="box" data-window="{w}">"#);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{ymax:.2}" x2="{cx:.2}" y2="{ymin:.2}" stroke="black"/>"#
        );
        for y in [ymin, ymax] {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                cx + half / 2.0
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            2.0 * half,
            yq1 - yq3
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            cx + half
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{w}</text>"#,
            y0 + 18.0
        );
        s.push_str("</g>\n");
    }

    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Window size (s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(metric_name)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(v: f64, range: f64) -> String {
    let decimals = if range >= 10.0 {
        0
    } else if range >= 1.0 {
        1
    } else if range >= 0.1 {
        2
    } else {
        3
    };
    format!("{v:.decimals$}")
}

pub fn write_boxplot_svg(distributions: &[(f64, Vec<f64>)], metric_name: &str, path: &Path) -> Result<()> {
    let svg = render_boxplot_svg(distributions, metric_name)?;
    std::fs::write(path, svg).map_err(|e| HarError::io(path, e))
}
