use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::stats::Summary;
use super::table::{MetricTable, TableSummary};
use super::AnalyticsError;
use crate::runner::VerdictCounts;

const AVERAGE: &str = "Average";
const STDEV: &str = "StDev";
const COUNT: &str = "Count";
const NOT_RECOGNISED: &str = "Not Recognised";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown report format {other:?} (expected csv or json)")),
        }
    }
}

/// JSON report document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub table: MetricTable,
    pub summaries: TableSummary,
    /// Verdict counts per metamorphism, when checking was run.
    pub verdicts: Option<IndexMap<String, VerdictCounts>>,
    pub meta: serde_json::Value,
}

/// Serializes a table with its summaries.
///
/// CSV: a header `ID, <morphisms>, Average, StDev, Not Recognised`, one row
/// per seed with an empty field for each missing score, then footer rows
/// Average, StDev, Count and Not Recognised. The overall mean and deviation
/// sit in the Average row under the Average and StDev headings; the total
/// missing count sits in the Not Recognised row under its own heading.
/// Verdicts and meta are only carried by the JSON form.
pub fn emit_report(
    table: &MetricTable,
    summaries: &TableSummary,
    verdicts: Option<&IndexMap<String, VerdictCounts>>,
    meta: serde_json::Value,
    format: ReportFormat,
) -> Result<Vec<u8>, AnalyticsError> {
    match format {
        ReportFormat::Json => {
            let report = Report {
                table: table.clone(),
                summaries: summaries.clone(),
                verdicts: verdicts.cloned(),
                meta,
            };
            let mut out = serde_json::to_vec_pretty(&report).map_err(|e| AnalyticsError::Parse(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => emit_csv(table, summaries),
    }
}

fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn emit_csv(table: &MetricTable, s: &TableSummary) -> Result<Vec<u8>, AnalyticsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ncols = table.columns.len();
    let csv_err = |e: csv::Error| AnalyticsError::Io(e.into());

    let mut header = vec!["ID".to_string()];
    header.extend(table.columns.iter().cloned());
    header.extend([AVERAGE, STDEV, NOT_RECOGNISED].map(String::from));
    w.write_record(&header).map_err(csv_err)?;

    for (i, row) in table.cells.iter().enumerate() {
        let rs = s.rows.get(i).copied().unwrap_or_default();
        let mut rec = vec![table.rows[i].clone()];
        rec.extend(row.iter().map(|c| num(*c)));
        rec.extend([num(rs.mean), num(rs.stddev), rs.missing.to_string()]);
        w.write_record(&rec).map_err(csv_err)?;
    }

    let footer = |label: &str, f: &dyn Fn(&Summary) -> String, tail: [String; 3]| {
        let mut rec = vec![label.to_string()];
        rec.extend((0..ncols).map(|j| s.columns.get(j).map(f).unwrap_or_default()));
        rec.extend(tail);
        rec
    };
    let blank = || [String::new(), String::new(), String::new()];
    let rows = [
        footer(AVERAGE, &|c| num(c.mean), [num(s.overall.mean), num(s.overall.stddev), String::new()]),
        footer(STDEV, &|c| num(c.stddev), blank()),
        footer(COUNT, &|c| c.count.to_string(), blank()),
        footer(NOT_RECOGNISED, &|c| c.missing.to_string(), [String::new(), String::new(), s.overall.missing.to_string()]),
    ];
    for rec in rows {
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| AnalyticsError::Io(e.into_error()))
}

/// Reads the table part of a CSV report back.
pub fn parse_csv_table(bytes: &[u8]) -> Result<MetricTable, AnalyticsError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut records = r.records();
    let parse_err = |e: csv::Error| AnalyticsError::Parse(e.to_string());

    let header = records
        .next()
        .ok_or_else(|| AnalyticsError::Parse("empty CSV".into()))?
        .map_err(parse_err)?;
    let n = header.len();
    if n < 4 || &header[0] != "ID" || &header[n - 3] != AVERAGE || &header[n - 2] != STDEV || &header[n - 1] != NOT_RECOGNISED
    {
        return Err(AnalyticsError::Parse(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let columns: Vec<String> = header.iter().skip(1).take(n - 4).map(String::from).collect();

    let mut table = MetricTable {
        rows: Vec::new(),
        columns,
        cells: Vec::new(),
    };
    for (line, rec) in records.enumerate() {
        let rec = rec.map_err(parse_err)?;
        if &rec[0] == AVERAGE {
            return Ok(table);
        }
        let cells = (1..n - 3)
            .map(|j| match &rec[j] {
                "" => Ok(None),
                v => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| AnalyticsError::Parse(format!("row {}: bad number {v:?}", line + 2))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.rows.push(rec[0].to_string());
        table.cells.push(cells);
    }
    Err(AnalyticsError::Parse("missing footer rows".into()))
}

pub fn parse_json_report(bytes: &[u8]) -> Result<Report, AnalyticsError> {
    serde_json::from_slice(bytes).map_err(|e| AnalyticsError::Parse(e.to_string()))
}
