//! Table and figure output for a [`SweepReport`](crate::experiment::SweepReport).

mod csv;
mod svg;

pub use csv::{render_report_csv, write_report_csv, CSV_HEADER};
pub use svg::{quartiles, render_boxplot_svg, write_boxplot_svg, BoxStats, Metric};
