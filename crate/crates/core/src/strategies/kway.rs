//! k-way combinatorial generation and coverage measurement.
//!
//! A target is a (seed, ordered n-tuple of unary morphisms) pair, the tuple
//! written in composition order: `(f, g)` means `f ∘ g`, so `g` is applied
//! first. A lineage covers the target when, read from its last step back to
//! its first, it contains the tuple as a (not necessarily contiguous)
//! subsequence.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{GenLimits, StrategyError};
use crate::model::{CaseId, Framework, Insertion, Lineage, Pool, Step, TestCase};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KwayConfig {
    pub k: usize,
    /// Exclude tuples that repeat a morphism.
    #[serde(default)]
    pub distinct_only: bool,
}

impl KwayConfig {
    pub fn new(k: usize) -> Self {
        Self { k, distinct_only: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KwayCoverage {
    /// Coverage for n = 0..=k.
    pub per_n: Vec<f64>,
    /// Minimum over `per_n`.
    pub aggregate: f64,
}

/// All ordered n-tuples of indices into `0..m`, lexicographically.
fn tuples(m: usize, n: usize, distinct_only: bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..m).filter_map(move |i| {
                    if distinct_only && prefix.contains(&i) {
                        return None;
                    }
                    let mut t = prefix.clone();
                    t.push(i);
                    Some(t)
                })
            })
            .collect();
    }
    out
}

/// Tracks which (seed, tuple) targets some lineage realizes.
struct Covered {
    index: HashMap<String, usize>,
    k: usize,
    targets: HashSet<(CaseId, Vec<usize>)>,
}

impl Covered {
    fn new(fw: &Framework, k: usize) -> Self {
        let index = fw
            .unary_morphisms()
            .enumerate()
            .map(|(i, m)| (m.name().to_string(), i))
            .collect();
        Self {
            index,
            k,
            targets: HashSet::new(),
        }
    }

    /// Records every tuple of length 1..=k embedded in `lineage`.
    fn add(&mut self, lineage: &Lineage) {
        // composition order = reversed application order
        let seq: Vec<usize> = lineage
            .morphism_names()
            .rev()
            .filter_map(|n| self.index.get(n).copied())
            .collect();
        let mut subs: HashSet<Vec<usize>> = HashSet::from([Vec::new()]);
        for &m in &seq {
            let grown: Vec<Vec<usize>> = subs
                .iter()
                .filter(|t| t.len() < self.k)
                .map(|t| {
                    let mut t = t.clone();
                    t.push(m);
                    t
                })
                .collect();
            subs.extend(grown);
        }
        for t in subs {
            if !t.is_empty() {
                self.targets.insert((lineage.seed_id, t));
            }
        }
    }

    fn contains(&self, seed: CaseId, tuple: &[usize]) -> bool {
        self.targets.contains(&(seed, tuple.to_vec()))
    }
}

pub fn measure_kway_coverage(pool: &Pool, fw: &Framework, cfg: &KwayConfig) -> KwayCoverage {
    let mut covered = Covered::new(fw, cfg.k);
    for (_, lineage) in pool.all_lineages() {
        covered.add(lineage);
    }
    let m = covered.index.len();
    let seeds = fw.seeds();

    let mut per_n = Vec::with_capacity(cfg.k + 1);
    let present = seeds.iter().filter(|s| pool.contains(&s.id)).count();
    per_n.push(fraction(present, seeds.len()));
    for n in 1..=cfg.k {
        let ts = tuples(m, n, cfg.distinct_only);
        let hit = seeds
            .iter()
            .map(|s| ts.iter().filter(|t| covered.contains(s.id, t)).count())
            .sum();
        per_n.push(fraction(hit, seeds.len() * ts.len()));
    }
    let aggregate = per_n.iter().copied().fold(1.0, f64::min);
    KwayCoverage { per_n, aggregate }
}

fn fraction(hit: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// Builds a pool meeting k-way coverage by composing each uncovered tuple
/// directly onto its seed, for n = 1..=k in turn.
///
/// A composed datum that collides with an existing case is recorded as an
/// alias lineage of that case, so the target still counts as covered.
/// Targets containing a morphism that is inapplicable along the way are
/// skipped with a warning.
pub fn generate_kway(fw: &Framework, cfg: &KwayConfig, limits: &GenLimits) -> Result<Pool, StrategyError> {
    if cfg.k > limits.max_depth {
        return Err(StrategyError::LimitExceeded(format!(
            "k = {} exceeds max_depth = {}",
            cfg.k, limits.max_depth
        )));
    }
    let skipped = fw.morphisms().len() - fw.unary_morphisms().count();
    if skipped > 0 {
        log::warn!("k-way generation ignores {skipped} non-unary datamorphism(s)");
    }

    let morphisms: Vec<_> = fw.unary_morphisms().collect();
    let mut pool = Pool::from_seeds(fw.seeds());
    if pool.len() > limits.max_pool_size {
        return Err(StrategyError::LimitExceeded(format!(
            "{} seeds exceed max_pool_size = {}",
            pool.len(),
            limits.max_pool_size
        )));
    }
    let mut covered = Covered::new(fw, cfg.k);

    for n in 1..=cfg.k {
        let ts = tuples(morphisms.len(), n, cfg.distinct_only);
        for seed in fw.seeds() {
            'tuple: for t in &ts {
                if covered.contains(seed.id, t) {
                    continue;
                }
                let mut datum = seed.datum.clone();
                let mut lineage = seed.lineage.clone();
                // apply the innermost (rightmost) morphism first
                for &i in t.iter().rev() {
                    let m = morphisms[i];
                    let params = limits.grid(m).swap_remove(0);
                    match m.apply(std::slice::from_ref(&datum), &params) {
                        Ok(d) => datum = d,
                        Err(e) => {
                            log::warn!("k-way target skipped for seed {}: {e}", seed.id);
                            continue 'tuple;
                        }
                    }
                    lineage = lineage.extended(Step::unary(m.name(), params));
                }
                covered.add(&lineage);
                if pool.insert_or_alias(TestCase::derived(datum, lineage)) == Insertion::New
                    && pool.len() > limits.max_pool_size
                {
                    return Err(StrategyError::LimitExceeded(format!(
                        "k-way pool needs more than max_pool_size = {} cases",
                        limits.max_pool_size
                    )));
                }
            }
        }
    }
    Ok(pool)
}
