//! Test frameworks: seeds, datamorphisms and metamorphisms bound together.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::case::{Lineage, Step, TestCase};
use super::datum::{CaseId, Datum, DatumKind};
use super::morphism::{Datamorphism, MorphError, MorphParams};
use super::pool::Pool;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Correctness condition over the base output and the `m` mutant outputs,
/// given the metamorphism's tolerance.
pub type Relation = dyn Fn(&Datum, &[Datum], f64) -> bool + Send + Sync;

/// A metamorphic relation expressed through unary datamorphisms:
/// `R(P(x), P(φ1(x)), …, P(φm(x)))`.
#[derive(Clone)]
pub struct Metamorphism {
    pub name: String,
    pub morphisms: Vec<(String, MorphParams)>,
    pub tolerance: f64,
    relation: Arc<Relation>,
}

impl fmt::Debug for Metamorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metamorphism")
            .field("name", &self.name)
            .field("morphisms", &self.morphisms)
            .field("tolerance", &self.tolerance)
            .finish_non_exhaustive()
    }
}

impl Metamorphism {
    pub fn new<R>(name: impl Into<String>, morphisms: Vec<(String, MorphParams)>, relation: R) -> Self
    where
        R: Fn(&Datum, &[Datum], f64) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            morphisms,
            tolerance: DEFAULT_TOLERANCE,
            relation: Arc::new(relation),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// `|P(x) − P(φ(x))| ≤ tolerance` for numeric outputs, exact equality
    /// otherwise.
    pub fn equal_outputs(name: impl Into<String>, morphism: impl Into<String>) -> Self {
        Self::new(
            name,
            vec![(morphism.into(), MorphParams::new())],
            |base, mutants, tol| {
                mutants.iter().all(|m| match (base, m) {
                    (Datum::Number(a), Datum::Number(b)) => (a - b).abs() <= tol,
                    _ => base == m,
                })
            },
        )
    }

    pub fn holds(&self, base: &Datum, mutants: &[Datum]) -> bool {
        (self.relation)(base, mutants, self.tolerance)
    }

    /// The lineage steps a mutant for position `i` adds on top of its base.
    pub fn step(&self, i: usize) -> Step {
        let (name, params) = &self.morphisms[i];
        Step::unary(name.clone(), params.clone())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error("duplicate seed {0}")]
    DuplicateSeed(CaseId),
    #[error("seed {0} does not conform to the framework domain")]
    SeedKind(CaseId),
    #[error("duplicate datamorphism name {0:?}")]
    DuplicateMorphism(String),
    #[error("metamorphism {metamorphism:?} references unknown datamorphism {morphism:?}")]
    UnknownMorphism { metamorphism: String, morphism: String },
    #[error("metamorphism {metamorphism:?} uses {morphism:?} of arity {arity}; only unary morphisms are supported")]
    NonUnary {
        metamorphism: String,
        morphism: String,
        arity: usize,
    },
    #[error("metamorphism {0:?} has no datamorphisms")]
    EmptyMetamorphism(String),
    #[error("metamorphism {name:?} has invalid tolerance {tolerance}")]
    Tolerance { name: String, tolerance: f64 },
    #[error("datamorphism {morphism:?} is not deterministic on seed {seed}")]
    Nondeterministic { morphism: String, seed: CaseId },
    #[error("datamorphism {morphism:?} produced a value outside the domain from seed {seed}")]
    OutputKind { morphism: String, seed: CaseId },
    #[error("metamorphism {name:?}: {source}")]
    Params { name: String, source: MorphError },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("lineage seed {0} is not in the pool")]
    MissingSeed(CaseId),
    #[error("lineage argument {0} is not in the pool")]
    MissingArgument(CaseId),
    #[error("unknown datamorphism {0:?}")]
    UnknownMorphism(String),
    #[error(transparent)]
    Morph(#[from] MorphError),
}

/// The triple ⟨seeds, datamorphisms, metamorphisms⟩ over one input domain.
#[derive(Clone, Debug)]
pub struct Framework {
    pub name: String,
    pub domain: DatumKind,
    seeds: Vec<TestCase>,
    morphisms: Vec<Datamorphism>,
    metamorphisms: Vec<Metamorphism>,
}

impl Framework {
    pub fn new(
        name: impl Into<String>,
        domain: DatumKind,
        seeds: Vec<Datum>,
        morphisms: Vec<Datamorphism>,
        metamorphisms: Vec<Metamorphism>,
    ) -> Result<Self, FrameworkError> {
        let mut seen = HashSet::new();
        let mut seed_cases = Vec::with_capacity(seeds.len());
        for d in seeds {
            let case = TestCase::seed(d);
            if !seen.insert(case.id) {
                return Err(FrameworkError::DuplicateSeed(case.id));
            }
            if !domain.conforms(&case.datum) {
                return Err(FrameworkError::SeedKind(case.id));
            }
            seed_cases.push(case);
        }

        let mut names = HashSet::new();
        for m in &morphisms {
            if !names.insert(m.name().to_string()) {
                return Err(FrameworkError::DuplicateMorphism(m.name().to_string()));
            }
        }

        let mut fw = Self {
            name: name.into(),
            domain,
            seeds: seed_cases,
            morphisms,
            metamorphisms: Vec::new(),
        };
        // Parameters are stored resolved so mutant lineages built from
        // schema defaults match the metamorphism's steps.
        for mut mm in metamorphisms {
            let resolved = fw.validate_metamorphism(&mm)?;
            for (slot, params) in mm.morphisms.iter_mut().zip(resolved) {
                slot.1 = params;
            }
            fw.metamorphisms.push(mm);
        }
        Ok(fw)
    }

    fn validate_metamorphism(&self, mm: &Metamorphism) -> Result<Vec<MorphParams>, FrameworkError> {
        if mm.morphisms.is_empty() {
            return Err(FrameworkError::EmptyMetamorphism(mm.name.clone()));
        }
        if !(mm.tolerance >= 0.0) {
            return Err(FrameworkError::Tolerance {
                name: mm.name.clone(),
                tolerance: mm.tolerance,
            });
        }
        let mut resolved = Vec::with_capacity(mm.morphisms.len());
        for (name, params) in &mm.morphisms {
            let morph = self.morphism(name).ok_or_else(|| FrameworkError::UnknownMorphism {
                metamorphism: mm.name.clone(),
                morphism: name.clone(),
            })?;
            if morph.arity() != 1 {
                return Err(FrameworkError::NonUnary {
                    metamorphism: mm.name.clone(),
                    morphism: name.clone(),
                    arity: morph.arity(),
                });
            }
            resolved.push(morph.resolve_params(params).map_err(|source| FrameworkError::Params {
                name: mm.name.clone(),
                source,
            })?);
        }
        Ok(resolved)
    }

    pub fn seeds(&self) -> &[TestCase] {
        &self.seeds
    }

    pub fn morphisms(&self) -> &[Datamorphism] {
        &self.morphisms
    }

    pub fn unary_morphisms(&self) -> impl Iterator<Item = &Datamorphism> {
        self.morphisms.iter().filter(|m| m.arity() == 1)
    }

    pub fn metamorphisms(&self) -> &[Metamorphism] {
        &self.metamorphisms
    }

    pub fn morphism(&self, name: &str) -> Option<&Datamorphism> {
        self.morphisms.iter().find(|m| m.name() == name)
    }

    /// Same framework with a different seed set.
    pub fn with_seeds(&self, seeds: Vec<Datum>) -> Result<Self, FrameworkError> {
        Framework::new(
            self.name.clone(),
            self.domain.clone(),
            seeds,
            self.morphisms.clone(),
            self.metamorphisms.clone(),
        )
    }

    /// Applies one lineage step to `current`, fetching extra arguments from
    /// `pool`.
    pub fn apply_step(&self, current: &Datum, step: &Step, pool: &Pool) -> Result<Datum, ReplayError> {
        let morph = self
            .morphism(&step.morphism)
            .ok_or_else(|| ReplayError::UnknownMorphism(step.morphism.clone()))?;
        let mut args = Vec::with_capacity(1 + step.args.len());
        args.push(current.clone());
        for id in &step.args {
            let c = pool.get(id).ok_or(ReplayError::MissingArgument(*id))?;
            args.push(c.datum.clone());
        }
        Ok(morph.apply(&args, &step.params)?)
    }

    /// Re-derives a datum by applying `lineage` from its seed.
    pub fn replay(&self, lineage: &Lineage, pool: &Pool) -> Result<Datum, ReplayError> {
        let seed = pool
            .get(&lineage.seed_id)
            .ok_or(ReplayError::MissingSeed(lineage.seed_id))?;
        let mut current = seed.datum.clone();
        for step in &lineage.steps {
            current = self.apply_step(&current, step, pool)?;
        }
        Ok(current)
    }

    /// Structural and behavioural self-check: metamorphism references,
    /// seed conformance, and determinism plus domain closure of every unary
    /// morphism on every seed.
    pub fn self_check(&self) -> Result<(), FrameworkError> {
        let mut seen = HashSet::new();
        for s in &self.seeds {
            if !seen.insert(s.id) {
                return Err(FrameworkError::DuplicateSeed(s.id));
            }
            if !self.domain.conforms(&s.datum) {
                return Err(FrameworkError::SeedKind(s.id));
            }
        }
        for mm in &self.metamorphisms {
            self.validate_metamorphism(mm)?;
        }
        for m in self.unary_morphisms() {
            let params = m.default_params();
            for s in &self.seeds {
                let args = std::slice::from_ref(&s.datum);
                let (Ok(a), Ok(b)) = (m.apply(args, &params), m.apply(args, &params)) else {
                    continue;
                };
                if a != b {
                    return Err(FrameworkError::Nondeterministic {
                        morphism: m.name().to_string(),
                        seed: s.id,
                    });
                }
                if !self.domain.conforms(&a) {
                    return Err(FrameworkError::OutputKind {
                        morphism: m.name().to_string(),
                        seed: s.id,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inc() -> Datamorphism {
        Datamorphism::unary("inc", |x| Datum::Number(x.as_number().unwrap() + 1.0))
    }

    #[test]
    fn rejects_duplicate_seeds() {
        let err = Framework::new(
            "t",
            DatumKind::Number,
            vec![Datum::Number(1.0), Datum::Number(1.0)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, FrameworkError::DuplicateSeed(_)));
    }

    #[test]
    fn rejects_unknown_and_binary_references() {
        let mid = Datamorphism::new("mid", 2, |a, _| a[0].clone());
        let err = Framework::new(
            "t",
            DatumKind::Number,
            vec![],
            vec![mid],
            vec![Metamorphism::equal_outputs("m", "mid")],
        )
        .unwrap_err();
        assert!(matches!(err, FrameworkError::NonUnary { arity: 2, .. }));

        let err = Framework::new(
            "t",
            DatumKind::Number,
            vec![],
            vec![inc()],
            vec![Metamorphism::equal_outputs("m", "dec")],
        )
        .unwrap_err();
        assert!(matches!(err, FrameworkError::UnknownMorphism { .. }));
    }

    #[test]
    fn rejects_wrong_seed_kind() {
        let err = Framework::new("t", DatumKind::Number, vec![Datum::Text("x".into())], vec![], vec![])
            .unwrap_err();
        assert!(matches!(err, FrameworkError::SeedKind(_)));
    }

    #[test]
    fn self_check_catches_domain_escape() {
        let to_text = Datamorphism::unary("to_text", |x| Datum::Text(x.to_string()));
        let fw = Framework::new("t", DatumKind::Number, vec![Datum::Number(1.0)], vec![to_text], vec![]).unwrap();
        assert!(matches!(fw.self_check(), Err(FrameworkError::OutputKind { .. })));
    }

    #[test]
    fn self_check_catches_nondeterminism() {
        use std::sync::atomic::{AtomicU64, Ordering};
        let counter = AtomicU64::new(0);
        let flaky = Datamorphism::unary("flaky", move |_| {
            Datum::Number(counter.fetch_add(1, Ordering::Relaxed) as f64)
        });
        let fw = Framework::new("t", DatumKind::Number, vec![Datum::Number(1.0)], vec![flaky], vec![]).unwrap();
        assert!(matches!(fw.self_check(), Err(FrameworkError::Nondeterministic { .. })));
    }

    #[test]
    fn replay_reproduces_datum() {
        let fw = Framework::new("t", DatumKind::Number, vec![Datum::Number(1.0)], vec![inc()], vec![]).unwrap();
        let pool = Pool::from_seeds(fw.seeds());
        let seed = &fw.seeds()[0];
        let lineage = seed
            .lineage
            .extended(Step::unary("inc", MorphParams::new()))
            .extended(Step::unary("inc", MorphParams::new()));
        assert_eq!(fw.replay(&lineage, &pool).unwrap(), Datum::Number(3.0));
        let bad = seed.lineage.extended(Step::unary("nope", MorphParams::new()));
        assert_eq!(
            fw.replay(&bad, &pool),
            Err(ReplayError::UnknownMorphism("nope".into()))
        );
    }
}
