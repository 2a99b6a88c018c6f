//! Test-generation strategies.
//!
//! All strategies start from the framework's seeds and grow a [`Pool`]
//! through lineage-recorded datamorphism applications. Output is a pure
//! function of the framework, the configuration and the rng seed.

mod exhaustive;
mod explore;
mod kway;
mod optimal;
mod random;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exhaustive::generate_exhaustive;
pub use explore::{distance, explore_boundary, Distance, ExploreConfig, ExploreResult};
pub use kway::{generate_kway, measure_kway_coverage, KwayConfig, KwayCoverage};
pub use optimal::{generate_optimal, Fitness, GaConfig, GaResult};
pub use random::generate_random;

use crate::model::{Datamorphism, MorphError, MorphParams};
use crate::runner::RunnerError;

pub const DEFAULT_MAX_POOL_SIZE: usize = 10_000;
pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenLimits {
    pub max_pool_size: usize,
    /// Maximum number of lineage steps.
    pub max_depth: usize,
    /// Per-morphism parameter sets to enumerate. Morphisms without an entry
    /// use their schema defaults.
    pub param_grid: BTreeMap<String, Vec<MorphParams>>,
}

impl Default for GenLimits {
    fn default() -> Self {
        Self {
            max_pool_size: DEFAULT_MAX_POOL_SIZE,
            max_depth: DEFAULT_MAX_DEPTH,
            param_grid: BTreeMap::new(),
        }
    }
}

impl GenLimits {
    pub fn with_max_pool_size(mut self, n: usize) -> Self {
        self.max_pool_size = n;
        self
    }

    pub fn with_max_depth(mut self, n: usize) -> Self {
        self.max_depth = n;
        self
    }

    pub fn grid(&self, m: &Datamorphism) -> Vec<MorphParams> {
        match self.param_grid.get(m.name()) {
            Some(grid) if !grid.is_empty() => grid
                .iter()
                .map(|p| m.resolve_params(p).unwrap_or_else(|_| p.clone()))
                .collect(),
            _ => vec![m.default_params()],
        }
    }
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("generation limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown fitness {0:?} (expected one of max_numeric, diversity, violations)")]
    UnknownFitness(String),
    #[error("fitness \"violations\" needs a subject")]
    FitnessNeedsSubject,
    #[error("both endpoints are classified as {0}; exploration needs two classes")]
    SameClass(String),
    #[error("no convergence after {iterations} iterations (distance {distance})")]
    NoConvergence { iterations: usize, distance: f64 },
    #[error("subject failed on {input}: {message}")]
    SubjectFailed { input: String, message: String },
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Runner(#[from] RunnerError),
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{Datamorphism, Datum, DatumKind, Framework, Pool};

    /// Bits(width) framework with one set-bit morphism per listed index.
    pub fn bits_framework(width: usize, seed: &str, set: &[usize]) -> Framework {
        let morphisms = set
            .iter()
            .map(|&i| {
                Datamorphism::unary(format!("set{i}"), move |d| match d {
                    Datum::Bits(b) => {
                        let mut b = b.clone();
                        b[i] = true;
                        Datum::Bits(b)
                    }
                    other => other.clone(),
                })
            })
            .collect();
        Framework::new(
            "bits",
            DatumKind::Bits { width: Some(width) },
            vec![Datum::bits_from_str(seed).unwrap()],
            morphisms,
            vec![],
        )
        .unwrap()
    }

    /// Text framework whose morphisms append their own name: every
    /// composition yields a distinct datum.
    pub fn append_framework(seeds: &[&str], names: &[&str]) -> Framework {
        let morphisms = names
            .iter()
            .map(|&n| {
                let n = n.to_string();
                Datamorphism::unary(n.clone(), move |d| Datum::Text(format!("{}{}", d.as_text().unwrap(), n)))
            })
            .collect();
        Framework::new(
            "append",
            DatumKind::Text,
            seeds.iter().map(|s| Datum::Text(s.to_string())).collect(),
            morphisms,
            vec![],
        )
        .unwrap()
    }

    pub fn assert_replays(fw: &Framework, pool: &Pool) {
        for (case, lineage) in pool.all_lineages() {
            let d = fw.replay(lineage, pool).expect("replay");
            assert_eq!(d.case_id(), case.id, "lineage {lineage:?} does not replay");
        }
    }
}
