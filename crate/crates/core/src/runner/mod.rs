//! Subject execution and metamorphism oracles.

mod check;
mod external;
pub mod protocol;
mod subject;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_metamorphisms, CheckReport, Verdict, VerdictCounts, VerdictRecord};
pub use external::ExternalSession;
pub use subject::{
    Evaluator, ExternalSpec, Outcome, Session, Subject, SubjectKind, DEFAULT_MAX_RESTARTS, DEFAULT_TIMEOUT_MS,
};

use crate::model::{CaseId, Pool};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("subject {command:?} could not be started: {reason}")]
    SubjectUnavailable { command: String, reason: String },
    #[error("protocol violation from {command:?} on output line {line}: {message} (line was {content:?})")]
    Protocol {
        command: String,
        line: usize,
        message: String,
        content: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub case_id: CaseId,
    pub outcome: Outcome,
}

/// Runs `subject` once on every pool case, in pool order.
pub fn execute_pool(subject: &Subject, pool: &Pool, workers: usize) -> Result<Vec<ExecutionRecord>, RunnerError> {
    let batch: Vec<(CaseId, &crate::model::Datum)> = pool.iter().map(|c| (c.id, &c.datum)).collect();
    let mut session = subject.session(workers)?;
    let outcomes = session.evaluate(&batch)?;
    Ok(batch
        .iter()
        .zip(outcomes)
        .map(|((id, _), outcome)| ExecutionRecord { case_id: *id, outcome })
        .collect())
}
