use serde::{Deserialize, Serialize};

use super::datum::{CaseId, Datum};
use super::morphism::MorphParams;

/// One datamorphism application inside a lineage.
///
/// The chain value is always the first argument; `args` lists the pool
/// cases supplying the remaining arguments of a k-ary morphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub morphism: String,
    #[serde(default, skip_serializing_if = "MorphParams::is_empty")]
    pub params: MorphParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<CaseId>,
}

impl Step {
    pub fn unary(morphism: impl Into<String>, params: MorphParams) -> Self {
        Self {
            morphism: morphism.into(),
            params,
            args: Vec::new(),
        }
    }
}

/// How a case was derived: its seed plus the applied steps, in application
/// order (`steps[0]` ran first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lineage {
    pub seed_id: CaseId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Step>,
}

impl Lineage {
    pub fn seed(seed_id: CaseId) -> Self {
        Self {
            seed_id,
            steps: Vec::new(),
        }
    }

    pub fn is_seed(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn extended(&self, step: Step) -> Lineage {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(step);
        Lineage {
            seed_id: self.seed_id,
            steps,
        }
    }

    /// Morphism names in application order.
    pub fn morphism_names(&self) -> impl DoubleEndedIterator<Item = &str> {
        self.steps.iter().map(|s| s.morphism.as_str())
    }

    /// True when `self` is `base` followed by exactly `suffix`.
    pub fn extends_by(&self, base: &Lineage, suffix: &[Step]) -> bool {
        self.seed_id == base.seed_id
            && self.steps.len() == base.steps.len() + suffix.len()
            && self.steps[..base.steps.len()] == base.steps[..]
            && self.steps[base.steps.len()..] == *suffix
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: CaseId,
    pub datum: Datum,
    pub lineage: Lineage,
}

impl TestCase {
    pub fn seed(datum: Datum) -> Self {
        let id = datum.case_id();
        Self {
            id,
            datum,
            lineage: Lineage::seed(id),
        }
    }

    /// A case whose id is derived from `datum`; the lineage never affects it.
    pub fn derived(datum: Datum, lineage: Lineage) -> Self {
        Self {
            id: datum.case_id(),
            datum,
            lineage,
        }
    }

    pub fn is_seed(&self) -> bool {
        self.lineage.is_seed()
    }
}
