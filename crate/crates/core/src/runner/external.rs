//! External-process subjects driven over the line-delimited protocol.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{Request, Response};
use super::subject::{ExternalSpec, Outcome};
use super::RunnerError;
use crate::model::{CaseId, Datum};

enum ReadEvent {
    Line(Vec<u8>),
    Eof,
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    events: Receiver<ReadEvent>,
    lines_read: usize,
}

impl Process {
    fn spawn(spec: &ExternalSpec) -> std::io::Result<Process> {
        let (program, args) = spec
            .command
            .split_first()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, events) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut buf = Vec::new();
                match reader.read_until(b'\n', &mut buf) {
                    Ok(0) | Err(_) => {
                        let _ = tx.send(ReadEvent::Eof);
                        return;
                    }
                    Ok(_) => {
                        if buf.last() == Some(&b'\n') {
                            buf.pop();
                        }
                        if tx.send(ReadEvent::Line(buf)).is_err() {
                            return;
                        }
                    }
                }
            }
        });
        Ok(Process {
            child,
            stdin,
            events,
            lines_read: 0,
        })
    }

    fn send(&mut self, req: &Request) -> std::io::Result<()> {
        writeln!(self.stdin, "{}", req.to_line())?;
        self.stdin.flush()
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        self.kill();
    }
}

/// A running external subject. Up to `window` requests are kept in flight.
pub struct ExternalSession {
    spec: ExternalSpec,
    window: usize,
    process: Option<Process>,
    restarts: u32,
}

impl ExternalSession {
    pub fn start(spec: ExternalSpec, window: usize) -> Result<Self, RunnerError> {
        let process = Process::spawn(&spec).map_err(|e| RunnerError::SubjectUnavailable {
            command: spec.command.join(" "),
            reason: e.to_string(),
        })?;
        Ok(Self {
            spec,
            window: window.max(1),
            process: Some(process),
            restarts: 0,
        })
    }

    fn command(&self) -> String {
        self.spec.command.join(" ")
    }

    /// Replaces the process after a crash. Returns false once the restart
    /// budget is spent (or the command no longer starts).
    fn restart_after_crash(&mut self) -> bool {
        if let Some(mut p) = self.process.take() {
            p.kill();
        }
        if self.restarts >= self.spec.max_restarts {
            return false;
        }
        self.restarts += 1;
        log::warn!("restarting subject {} ({}/{})", self.command(), self.restarts, self.spec.max_restarts);
        self.process = Process::spawn(&self.spec).ok();
        self.process.is_some()
    }

    /// Replaces a process that stopped answering. Timeouts do not consume the
    /// crash restart budget.
    fn restart_after_timeout(&mut self) -> bool {
        if let Some(mut p) = self.process.take() {
            p.kill();
        }
        self.process = Process::spawn(&self.spec).ok();
        self.process.is_some()
    }

    pub fn evaluate(&mut self, batch: &[(CaseId, &Datum)]) -> Result<Vec<Outcome>, RunnerError> {
        let timeout = Duration::from_millis(self.spec.timeout_ms);
        let command = self.command();
        let mut results: Vec<Option<Outcome>> = vec![None; batch.len()];

        // Identical ids within a batch are sent once.
        let mut by_id: HashMap<String, Vec<usize>> = HashMap::new();
        let mut queue: VecDeque<String> = VecDeque::new();
        let mut inputs: HashMap<String, &Datum> = HashMap::new();
        for (i, (id, d)) in batch.iter().enumerate() {
            let hex = id.to_hex();
            let slots = by_id.entry(hex.clone()).or_default();
            if slots.is_empty() {
                queue.push_back(hex.clone());
                inputs.insert(hex, d);
            }
            slots.push(i);
        }

        let mut in_flight: HashMap<String, Instant> = HashMap::new();
        let mut expired: HashSet<String> = HashSet::new();

        let resolve = |results: &mut Vec<Option<Outcome>>, id: &str, outcome: Outcome| {
            for &i in &by_id[id] {
                results[i] = Some(outcome.clone());
            }
        };

        loop {
            if self.process.is_none() {
                let reason = format!("subject unavailable after {} restarts", self.restarts);
                for id in in_flight.keys().cloned().chain(queue.drain(..)).collect::<Vec<_>>() {
                    resolve(&mut results, &id, Outcome::SubjectError(reason.clone()));
                }
                break;
            }

            let mut crashed = false;
            while in_flight.len() < self.window {
                let Some(id) = queue.pop_front() else { break };
                let req = Request {
                    id: id.clone(),
                    input: inputs[&id].clone(),
                };
                let proc = self.process.as_mut().expect("live process");
                in_flight.insert(id, Instant::now() + timeout);
                if proc.send(&req).is_err() {
                    crashed = true;
                    break;
                }
            }

            if !crashed {
                if in_flight.is_empty() {
                    break;
                }
                let deadline = *in_flight.values().min().expect("non-empty");
                let wait = deadline.saturating_duration_since(Instant::now());
                let proc = self.process.as_mut().expect("live process");
                match proc.events.recv_timeout(wait) {
                    Ok(ReadEvent::Line(raw)) => {
                        proc.lines_read += 1;
                        let line_no = proc.lines_read;
                        let violation = |message: String, content: String| RunnerError::Protocol {
                            command: command.clone(),
                            line: line_no,
                            message,
                            content,
                        };
                        let line = String::from_utf8(raw.clone())
                            .map_err(|_| violation("invalid UTF-8".into(), String::from_utf8_lossy(&raw).into()))?;
                        let resp = Response::parse(&line).map_err(|e| violation(e, line.clone()))?;
                        let id = resp.id().to_string();
                        if in_flight.remove(&id).is_some() {
                            let outcome = match resp {
                                Response::Output { output, .. } => Outcome::Output(output),
                                Response::Error { error, .. } => Outcome::SubjectError(error),
                            };
                            resolve(&mut results, &id, outcome);
                        } else if !expired.contains(&id) {
                            return Err(violation(format!("response for unknown id {id:?}"), line));
                        }
                        continue;
                    }
                    Ok(ReadEvent::Eof) | Err(RecvTimeoutError::Disconnected) => crashed = true,
                    Err(RecvTimeoutError::Timeout) => {
                        let now = Instant::now();
                        let late: Vec<String> = in_flight
                            .iter()
                            .filter(|(_, &d)| d <= now)
                            .map(|(id, _)| id.clone())
                            .collect();
                        for id in late {
                            in_flight.remove(&id);
                            resolve(&mut results, &id, Outcome::Timeout);
                            expired.insert(id);
                        }
                        // Requests still pending on the stalled process are resent.
                        for (id, _) in in_flight.drain() {
                            queue.push_front(id);
                        }
                        self.restart_after_timeout();
                        continue;
                    }
                }
            }

            if crashed {
                let status = self
                    .process
                    .as_mut()
                    .and_then(|p| p.child.try_wait().ok().flatten())
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "output closed".into());
                for (id, _) in in_flight.drain() {
                    resolve(&mut results, &id, Outcome::SubjectError(format!("subject crashed ({status})")));
                }
                self.restart_after_crash();
            }
        }

        Ok(results
            .into_iter()
            .map(|r| r.expect("every case resolved"))
            .collect())
    }
}
