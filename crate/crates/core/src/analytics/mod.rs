//! Score tables, summary statistics, correlation and reports.

mod report;
mod stats;
mod table;

use thiserror::Error;

pub use report::{emit_report, parse_csv_table, parse_json_report, Report, ReportFormat};
pub use stats::{describe, pearson, CorrelationReport, Summary};
pub use table::{build_metric_table, summarize, MetricTable, TableSummary};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("table shape error: {0}")]
    Shape(String),
    #[error("correlation undefined: a vector has zero variance")]
    ZeroVariance,
    #[error("vectors have different lengths ({left} and {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("cannot parse report: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
