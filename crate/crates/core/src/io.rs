//! Pool, execution-record and verdict files.
//!
//! Pools and records are JSON lines: a header object, then one object per
//! case. Datums are stored as base64 of their canonical bytes, so a reload
//! is bit-exact and every id can be re-verified.

use std::io::{BufRead, Write};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CaseId, Datum, Lineage, Pool, TestCase};
use crate::runner::{CheckReport, ExecutionRecord, Outcome};
use crate::subjects::FrameworkSpec;

pub const POOL_FORMAT: &str = "morphtest-pool";
pub const RECORDS_FORMAT: &str = "morphtest-records";
pub const FILE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: stored id {stored} does not match datum id {actual}")]
    IdMismatch { line: usize, stored: CaseId, actual: CaseId },
    #[error("expected a {expected} file, found {found:?}")]
    WrongFormat { expected: &'static str, found: String },
    #[error("unsupported file version {0}")]
    Version(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolHeader {
    pub format: String,
    pub version: u32,
    pub framework: FrameworkSpec,
    /// Strategy name and configuration, as given.
    pub strategy: serde_json::Value,
    pub truncated: bool,
    pub size: usize,
}

impl PoolHeader {
    pub fn new(framework: FrameworkSpec, strategy: serde_json::Value, pool: &Pool) -> Self {
        Self {
            format: POOL_FORMAT.into(),
            version: FILE_VERSION,
            framework,
            strategy,
            truncated: pool.truncated,
            size: pool.len(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CaseLine {
    id: CaseId,
    datum: String,
    lineage: Lineage,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aliases: Vec<Lineage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordsHeader {
    pub format: String,
    pub version: u32,
    pub subject: String,
    pub size: usize,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: CaseId,
    #[serde(flatten)]
    outcome: OutcomeLine,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutcomeLine {
    Output(String),
    SubjectError(String),
    Timeout(bool),
}

fn json_line<T: Serialize>(w: &mut impl Write, value: &T) -> Result<(), FileError> {
    serde_json::to_writer(&mut *w, value).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T, FileError> {
    serde_json::from_str(text).map_err(|e| FileError::Syntax {
        line,
        message: e.to_string(),
    })
}

fn decode_datum(line: usize, b64: &str) -> Result<Datum, FileError> {
    let bytes = B64.decode(b64).map_err(|e| FileError::Syntax {
        line,
        message: format!("bad base64 datum: {e}"),
    })?;
    Datum::decode(&bytes).map_err(|e| FileError::Syntax {
        line,
        message: format!("bad datum encoding: {e}"),
    })
}

fn check_header(format: &str, version: u32, expected: &'static str) -> Result<(), FileError> {
    if format != expected {
        return Err(FileError::WrongFormat {
            expected,
            found: format.to_string(),
        });
    }
    if version != FILE_VERSION {
        return Err(FileError::Version(version));
    }
    Ok(())
}

/// Non-empty lines with 1-based line numbers.
fn lines(r: impl BufRead) -> impl Iterator<Item = Result<(usize, String), FileError>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e.into())),
    })
}

pub fn write_pool(mut w: impl Write, header: &PoolHeader, pool: &Pool) -> Result<(), FileError> {
    json_line(&mut w, header)?;
    for case in pool.iter() {
        json_line(
            &mut w,
            &CaseLine {
                id: case.id,
                datum: B64.encode(case.datum.canonical_bytes()),
                lineage: case.lineage.clone(),
                aliases: pool.aliases(&case.id).to_vec(),
            },
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pool(r: impl BufRead) -> Result<(PoolHeader, Pool), FileError> {
    let mut it = lines(r);
    let (n, text) = it.next().ok_or(FileError::Syntax {
        line: 1,
        message: "empty pool file".into(),
    })??;
    let header: PoolHeader = parse_line(n, &text)?;
    check_header(&header.format, header.version, POOL_FORMAT)?;

    let mut pool = Pool::new();
    pool.truncated = header.truncated;
    for item in it {
        let (n, text) = item?;
        let line: CaseLine = parse_line(n, &text)?;
        let datum = decode_datum(n, &line.datum)?;
        let actual = datum.case_id();
        if actual != line.id {
            return Err(FileError::IdMismatch {
                line: n,
                stored: line.id,
                actual,
            });
        }
        if !pool.insert(TestCase::derived(datum, line.lineage)) {
            return Err(FileError::Syntax {
                line: n,
                message: format!("duplicate case {actual}"),
            });
        }
        for alias in line.aliases {
            pool.add_alias(actual, alias);
        }
    }
    Ok((header, pool))
}

pub fn write_records(mut w: impl Write, subject: &str, records: &[ExecutionRecord]) -> Result<(), FileError> {
    json_line(
        &mut w,
        &RecordsHeader {
            format: RECORDS_FORMAT.into(),
            version: FILE_VERSION,
            subject: subject.into(),
            size: records.len(),
        },
    )?;
    for r in records {
        let outcome = match &r.outcome {
            Outcome::Output(d) => OutcomeLine::Output(B64.encode(d.canonical_bytes())),
            Outcome::SubjectError(m) => OutcomeLine::SubjectError(m.clone()),
            Outcome::Timeout => OutcomeLine::Timeout(true),
        };
        json_line(&mut w, &RecordLine { id: r.case_id, outcome })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(r: impl BufRead) -> Result<(RecordsHeader, Vec<ExecutionRecord>), FileError> {
    let mut it = lines(r);
    let (n, text) = it.next().ok_or(FileError::Syntax {
        line: 1,
        message: "empty records file".into(),
    })??;
    let header: RecordsHeader = parse_line(n, &text)?;
    check_header(&header.format, header.version, RECORDS_FORMAT)?;
    let mut records = Vec::new();
    for item in it {
        let (n, text) = item?;
        let line: RecordLine = parse_line(n, &text)?;
        let outcome = match line.outcome {
            OutcomeLine::Output(b64) => Outcome::Output(decode_datum(n, &b64)?),
            OutcomeLine::SubjectError(m) => Outcome::SubjectError(m),
            OutcomeLine::Timeout(_) => Outcome::Timeout,
        };
        records.push(ExecutionRecord {
            case_id: line.id,
            outcome,
        });
    }
    Ok((header, records))
}

pub fn write_verdicts(mut w: impl Write, report: &CheckReport) -> Result<(), FileError> {
    serde_json::to_writer_pretty(&mut w, report).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_verdicts(r: impl std::io::Read) -> Result<CheckReport, FileError> {
    serde_json::from_reader(r).map_err(|e| FileError::Syntax {
        line: e.line(),
        message: e.to_string(),
    })
}
