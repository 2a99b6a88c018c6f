//! Genetic search over datamorphism applications.
//!
//! The seeds form the initial population; each generation keeps the
//! `elitism_count` fittest cases and fills the rest with mutants of
//! tournament winners, one random applicable unary datamorphism each.
//! There is no crossover and termination is a fixed generation count.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::explore::{distance, Distance};
use super::StrategyError;
use crate::model::{CaseId, Datum, Framework, Pool, Step, TestCase};
use crate::runner::{Outcome, Session, Subject};

const ATTEMPTS_PER_SLOT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fitness {
    /// The case's number, or the L2 norm of its vector.
    MaxNumeric,
    /// Mean distance from the case to the framework seeds.
    Diversity,
    /// Number of metamorphisms the subject violates with the case as base.
    Violations,
}

impl FromStr for Fitness {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max_numeric" => Ok(Fitness::MaxNumeric),
            "diversity" => Ok(Fitness::Diversity),
            "violations" => Ok(Fitness::Violations),
            other => Err(StrategyError::UnknownFitness(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_cap: usize,
    pub generations: usize,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default = "default_elitism")]
    pub elitism_count: usize,
    #[serde(default)]
    pub rng_seed: u64,
    pub fitness: String,
}

fn default_tournament() -> usize {
    2
}

fn default_elitism() -> usize {
    1
}

impl GaConfig {
    pub fn new(population_cap: usize, generations: usize, fitness: impl Into<String>) -> Self {
        Self {
            population_cap,
            generations,
            tournament_size: default_tournament(),
            elitism_count: default_elitism(),
            rng_seed: 0,
            fitness: fitness.into(),
        }
    }

    pub fn with_rng_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<Fitness, StrategyError> {
        let fitness = self.fitness.parse()?;
        if self.population_cap == 0 {
            return Err(StrategyError::InvalidConfig("population_cap must be at least 1".into()));
        }
        if self.tournament_size == 0 {
            return Err(StrategyError::InvalidConfig("tournament_size must be at least 1".into()));
        }
        if self.elitism_count == 0 || self.elitism_count > self.population_cap {
            return Err(StrategyError::InvalidConfig(format!(
                "elitism_count must be in 1..={}, got {}",
                self.population_cap, self.elitism_count
            )));
        }
        Ok(fitness)
    }
}

#[derive(Clone, Debug)]
pub struct GaResult {
    /// Final population, fittest first, followed by any seed that did not
    /// survive.
    pub pool: Pool,
    /// Best fitness of the initial population, then after each generation.
    pub trace: Vec<f64>,
}

struct Scorer<'a> {
    fitness: Fitness,
    fw: &'a Framework,
    session: Option<Session>,
    outputs: HashMap<CaseId, Outcome>,
}

impl Scorer<'_> {
    fn score(&mut self, d: &Datum) -> Result<f64, StrategyError> {
        let s = match self.fitness {
            Fitness::MaxNumeric => match d {
                Datum::Number(x) => *x,
                Datum::NumVector(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
                _ => f64::NEG_INFINITY,
            },
            Fitness::Diversity => {
                let seeds = self.fw.seeds();
                seeds.iter().map(|s| distance(Distance::Auto, d, &s.datum)).sum::<f64>() / seeds.len() as f64
            }
            Fitness::Violations => self.violations(d)?,
        };
        Ok(if s.is_nan() { f64::NEG_INFINITY } else { s })
    }

    fn output(&mut self, d: &Datum) -> Result<Option<Datum>, StrategyError> {
        let id = d.case_id();
        if !self.outputs.contains_key(&id) {
            let session = self.session.as_mut().expect("violations fitness has a session");
            let out = session.evaluate_one(d)?;
            self.outputs.insert(id, out);
        }
        Ok(self.outputs[&id].output().cloned())
    }

    fn violations(&mut self, d: &Datum) -> Result<f64, StrategyError> {
        let fw = self.fw;
        let Some(base) = self.output(d)? else {
            return Ok(0.0);
        };
        let mut count = 0;
        'relations: for mm in fw.metamorphisms() {
            let mut outs = Vec::with_capacity(mm.morphisms.len());
            for (name, params) in &mm.morphisms {
                let m = fw.morphism(name).expect("framework validated");
                let Ok(mutant) = m.apply(std::slice::from_ref(d), params) else {
                    continue 'relations;
                };
                match self.output(&mutant)? {
                    Some(o) => outs.push(o),
                    None => continue 'relations,
                }
            }
            if !mm.holds(&base, &outs) {
                count += 1;
            }
        }
        Ok(count as f64)
    }
}

fn by_fitness_desc(a: &(TestCase, f64), b: &(TestCase, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
}

/// Runs the genetic strategy. `subject` is only consulted by the
/// `violations` fitness.
pub fn generate_optimal(fw: &Framework, cfg: &GaConfig, subject: Option<&Subject>) -> Result<GaResult, StrategyError> {
    let fitness = cfg.validate()?;
    let session = match (fitness, subject) {
        (Fitness::Violations, None) => return Err(StrategyError::FitnessNeedsSubject),
        (Fitness::Violations, Some(s)) => Some(s.session(1)?),
        _ => None,
    };
    let mut scorer = Scorer {
        fitness,
        fw,
        session,
        outputs: HashMap::new(),
    };
    let morphisms: Vec<_> = fw.unary_morphisms().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut population = Vec::new();
    for seed in fw.seeds().iter().take(cfg.population_cap) {
        let f = scorer.score(&seed.datum)?;
        population.push((seed.clone(), f));
    }
    population.sort_by(by_fitness_desc);
    let best = |p: &[(TestCase, f64)]| p.first().map_or(f64::NEG_INFINITY, |c| c.1);
    let mut trace = vec![best(&population)];

    for _ in 0..cfg.generations {
        let mut next: Vec<(TestCase, f64)> = population.iter().take(cfg.elitism_count).cloned().collect();
        let mut seen: HashSet<CaseId> = next.iter().map(|c| c.0.id).collect();

        let budget = ATTEMPTS_PER_SLOT * cfg.population_cap;
        let mut attempts = 0;
        while next.len() < cfg.population_cap && attempts < budget && !morphisms.is_empty() {
            attempts += 1;
            // tournament: best of `tournament_size` uniform draws
            let parent = (0..cfg.tournament_size)
                .map(|_| rng.gen_range(0..population.len()))
                .min()
                .expect("tournament_size >= 1");
            let parent = &population[parent].0;

            let params_for = |m: &&crate::model::Datamorphism| m.default_params();
            let applicable: Vec<_> = morphisms
                .iter()
                .filter(|m| m.is_applicable(std::slice::from_ref(&parent.datum), &params_for(m)))
                .collect();
            let Some(m) = applicable.choose(&mut rng) else {
                continue;
            };
            let params = m.default_params();
            let Ok(datum) = m.apply(std::slice::from_ref(&parent.datum), &params) else {
                continue;
            };
            if !seen.insert(datum.case_id()) {
                continue;
            }
            let lineage = parent.lineage.extended(Step::unary(m.name(), params));
            let f = scorer.score(&datum)?;
            next.push((TestCase::derived(datum, lineage), f));
        }

        next.sort_by(by_fitness_desc);
        population = next;
        trace.push(best(&population));
    }

    let mut pool = Pool::new();
    for (case, _) in population {
        pool.insert_or_alias(case);
    }
    for seed in fw.seeds() {
        if !pool.contains(&seed.id) {
            pool.insert(seed.clone());
        }
    }
    Ok(GaResult { pool, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Datamorphism, DatumKind, Metamorphism};
    use crate::strategies::testutil::assert_replays;

    fn doubling(seeds: &[f64]) -> Framework {
        Framework::new(
            "doubling",
            DatumKind::Number,
            seeds.iter().map(|&x| Datum::Number(x)).collect(),
            vec![Datamorphism::unary("double", |d| Datum::Number(d.as_number().unwrap() * 2.0))],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn doubling_reaches_powers_of_two() {
        let fw = doubling(&[1.0]);
        let r = generate_optimal(&fw, &GaConfig::new(2, 5, "max_numeric").with_rng_seed(9), None).unwrap();
        assert_eq!(r.trace, vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(r.pool.get_index(0).unwrap().datum, Datum::Number(32.0));
        assert_replays(&fw, &r.pool);
    }

    #[test]
    fn trace_is_monotone_for_larger_populations() {
        let fw = doubling(&[1.0, 3.0]);
        for cap in [2, 3, 8] {
            let r = generate_optimal(&fw, &GaConfig::new(cap, 50, "max_numeric").with_rng_seed(cap as u64), None)
                .unwrap();
            assert!(r.trace.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(r.trace.len(), 51);
            assert!(r.pool.len() <= cap + 2);
        }
    }

    #[test]
    fn zero_generations_is_seeds() {
        let fw = doubling(&[1.0, 5.0]);
        let r = generate_optimal(&fw, &GaConfig::new(4, 0, "max_numeric"), None).unwrap();
        assert_eq!(r.pool.len(), 2);
        assert_eq!(r.trace, vec![5.0]);
        assert!(r.pool.iter().all(|c| c.is_seed()));
    }

    #[test]
    fn config_errors() {
        let fw = doubling(&[1.0]);
        assert!(matches!(
            generate_optimal(&fw, &GaConfig::new(2, 1, "speed"), None),
            Err(StrategyError::UnknownFitness(_))
        ));
        assert!(matches!(
            generate_optimal(&fw, &GaConfig::new(2, 1, "violations"), None),
            Err(StrategyError::FitnessNeedsSubject)
        ));
        let mut cfg = GaConfig::new(2, 1, "max_numeric");
        cfg.elitism_count = 3;
        assert!(matches!(generate_optimal(&fw, &cfg, None), Err(StrategyError::InvalidConfig(_))));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let fw = doubling(&[1.0, 3.0, 7.0]);
        let cfg = GaConfig::new(5, 20, "diversity").with_rng_seed(42);
        let a = generate_optimal(&fw, &cfg, None).unwrap();
        let b = generate_optimal(&fw, &cfg, None).unwrap();
        let ids = |p: &Pool| p.iter().map(|c| (c.id, c.lineage.clone())).collect::<Vec<_>>();
        assert_eq!(ids(&a.pool), ids(&b.pool));
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn violations_fitness_counts_failed_relations() {
        let negate = Datamorphism::unary("negate", |d| Datum::Number(-d.as_number().unwrap()));
        let fw = Framework::new(
            "abs",
            DatumKind::Number,
            vec![Datum::Number(2.0)],
            vec![negate],
            vec![Metamorphism::equal_outputs("symmetric", "negate")],
        )
        .unwrap();
        // correct for x <= 0 only
        let subject = Subject::in_process("half_abs", |d| {
            let x = d.as_number().unwrap();
            Ok(Datum::Number(if x > 0.0 { x + 1.0 } else { -x }))
        });
        let r = generate_optimal(&fw, &GaConfig::new(2, 1, "violations"), Some(&subject)).unwrap();
        assert_eq!(r.trace, vec![1.0, 1.0]);
    }
}
