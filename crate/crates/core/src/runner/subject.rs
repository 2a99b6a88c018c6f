use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::external::ExternalSession;
use super::RunnerError;
use crate::model::{CaseId, Datum};

pub const DEFAULT_TIMEOUT_MS: u64 = 5000;
pub const DEFAULT_MAX_RESTARTS: u32 = 3;

pub type Evaluator = dyn Fn(&Datum) -> Result<Datum, String> + Send + Sync;

/// What happened when the subject was run on one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Output(Datum),
    SubjectError(String),
    Timeout,
}

impl Outcome {
    pub fn output(&self) -> Option<&Datum> {
        match self {
            Outcome::Output(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalSpec {
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default = "default_restarts")]
    pub max_restarts: u32,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

fn default_restarts() -> u32 {
    DEFAULT_MAX_RESTARTS
}

impl ExternalSpec {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }
}

#[derive(Clone)]
pub enum SubjectKind {
    InProcess(Arc<Evaluator>),
    External(ExternalSpec),
}

/// The program under test.
#[derive(Clone)]
pub struct Subject {
    pub name: String,
    pub kind: SubjectKind,
}

impl fmt::Debug for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            SubjectKind::InProcess(_) => "in-process".to_string(),
            SubjectKind::External(spec) => format!("external {:?}", spec.command),
        };
        f.debug_struct("Subject")
            .field("name", &self.name)
            .field("kind", &kind)
            .finish()
    }
}

impl Subject {
    pub fn in_process<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Datum) -> Result<Datum, String> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: SubjectKind::InProcess(Arc::new(f)),
        }
    }

    pub fn external(name: impl Into<String>, spec: ExternalSpec) -> Self {
        Self {
            name: name.into(),
            kind: SubjectKind::External(spec),
        }
    }

    /// Opens an evaluation session. External subjects are spawned here.
    pub fn session(&self, workers: usize) -> Result<Session, RunnerError> {
        let workers = workers.max(1);
        match &self.kind {
            SubjectKind::InProcess(f) => Ok(Session::InProcess {
                evaluator: Arc::clone(f),
                workers,
            }),
            SubjectKind::External(spec) => Ok(Session::External(ExternalSession::start(spec.clone(), workers)?)),
        }
    }

    /// Runs the subject on a single datum.
    pub fn invoke(&self, input: &Datum) -> Result<Outcome, RunnerError> {
        let mut s = self.session(1)?;
        s.evaluate_one(input)
    }
}

pub enum Session {
    InProcess { evaluator: Arc<Evaluator>, workers: usize },
    External(ExternalSession),
}

fn call(evaluator: &Evaluator, input: &Datum) -> Outcome {
    match catch_unwind(AssertUnwindSafe(|| evaluator(input))) {
        Ok(Ok(d)) => Outcome::Output(d),
        Ok(Err(msg)) => Outcome::SubjectError(msg),
        Err(_) => Outcome::SubjectError("subject panicked".into()),
    }
}

impl Session {
    /// Evaluates a batch; the result is in batch order.
    pub fn evaluate(&mut self, batch: &[(CaseId, &Datum)]) -> Result<Vec<Outcome>, RunnerError> {
        match self {
            Session::InProcess { evaluator, workers } => {
                if *workers <= 1 || batch.len() < 2 {
                    return Ok(batch.iter().map(|(_, d)| call(evaluator.as_ref(), d)).collect());
                }
                let chunk = batch.len().div_ceil(*workers);
                let evaluator: &Evaluator = evaluator.as_ref();
                let parts: Vec<Vec<Outcome>> = std::thread::scope(|scope| {
                    let handles: Vec<_> = batch
                        .chunks(chunk)
                        .map(|part| scope.spawn(move || part.iter().map(|(_, d)| call(evaluator, d)).collect()))
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
                });
                Ok(parts.into_iter().flatten().collect())
            }
            Session::External(ext) => ext.evaluate(batch),
        }
    }

    pub fn evaluate_one(&mut self, input: &Datum) -> Result<Outcome, RunnerError> {
        let id = input.case_id();
        Ok(self.evaluate(&[(id, input)])?.remove(0))
    }
}
