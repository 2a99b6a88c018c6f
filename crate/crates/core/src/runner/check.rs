//! Metamorphism checking over executed pools.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{ExecutionRecord, Outcome};
use crate::model::{CaseId, Framework, Lineage, Pool};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A required mutant is not in the pool.
    Inapplicable,
    /// The subject failed or timed out on an involved case.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub metamorphism: String,
    pub base: CaseId,
    /// One slot per datamorphism of the metamorphism; `None` where no mutant
    /// was found.
    pub mutants: Vec<Option<CaseId>>,
    pub outcome: Verdict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub pass: usize,
    pub fail: usize,
    pub inapplicable: usize,
    pub error: usize,
}

impl VerdictCounts {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Inapplicable => self.inapplicable += 1,
            Verdict::Error => self.error += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inapplicable + self.error
    }

    /// Fail share among decided (pass or fail) verdicts.
    pub fn fail_rate(&self) -> Option<f64> {
        let decided = self.pass + self.fail;
        (decided > 0).then(|| self.fail as f64 / decided as f64)
    }

    pub fn merge(&mut self, other: &VerdictCounts) {
        self.pass += other.pass;
        self.fail += other.fail;
        self.inapplicable += other.inapplicable;
        self.error += other.error;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdicts: Vec<VerdictRecord>,
    /// Counts per metamorphism, in framework order.
    pub summary: IndexMap<String, VerdictCounts>,
}

impl CheckReport {
    pub fn totals(&self) -> VerdictCounts {
        let mut t = VerdictCounts::default();
        for c in self.summary.values() {
            t.merge(c);
        }
        t
    }
}

/// Emits one verdict per (metamorphism, pool case).
///
/// The mutant for position `i` is the case whose lineage (primary or alias)
/// is exactly the base's lineage followed by the metamorphism's `i`-th
/// (morphism, params) step.
pub fn check_metamorphisms(fw: &Framework, pool: &Pool, records: &[ExecutionRecord]) -> CheckReport {
    let mut by_lineage: HashMap<&Lineage, CaseId> = HashMap::new();
    for (case, lineage) in pool.all_lineages() {
        by_lineage.entry(lineage).or_insert(case.id);
    }
    let outcomes: HashMap<CaseId, &Outcome> = records.iter().map(|r| (r.case_id, &r.outcome)).collect();

    let mut report = CheckReport::default();
    for mm in fw.metamorphisms() {
        let steps: Vec<_> = (0..mm.morphisms.len()).map(|i| mm.step(i)).collect();
        let counts = report.summary.entry(mm.name.clone()).or_default();
        for case in pool.iter() {
            // Prefer the base lineage under which every mutant is present.
            let mut best: Vec<Option<CaseId>> = vec![None; steps.len()];
            for lineage in pool.lineages(case) {
                let found: Vec<Option<CaseId>> = steps
                    .iter()
                    .map(|s| by_lineage.get(&lineage.extended(s.clone())).copied())
                    .collect();
                let n_found = found.iter().flatten().count();
                if n_found > best.iter().flatten().count() {
                    best = found;
                }
                if n_found == steps.len() {
                    break;
                }
            }

            let outcome = if best.iter().any(Option::is_none) {
                Verdict::Inapplicable
            } else {
                let involved = std::iter::once(case.id).chain(best.iter().flatten().copied());
                let mut outputs = Vec::with_capacity(steps.len() + 1);
                let mut errored = false;
                for id in involved {
                    match outcomes.get(&id) {
                        Some(Outcome::Output(d)) => outputs.push(d.clone()),
                        _ => {
                            errored = true;
                            break;
                        }
                    }
                }
                if errored {
                    Verdict::Error
                } else if mm.holds(&outputs[0], &outputs[1..]) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            };
            counts.add(outcome);
            report.verdicts.push(VerdictRecord {
                metamorphism: mm.name.clone(),
                base: case.id,
                mutants: best,
                outcome,
            });
        }
    }
    report
}
