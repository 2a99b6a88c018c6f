use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GenLimits;
use crate::model::{Framework, Insertion, Pool, Step, TestCase};

/// Consecutive failed attempts allowed per requested case.
const ATTEMPTS_PER_CASE: usize = 50;

/// Grows the pool one mutant at a time from uniformly chosen
/// (pool case, morphism, grid parameter) triples.
///
/// Stops after `count` new cases, or with `truncated` set once
/// `50 × count` consecutive attempts produced nothing new, or the pool cap
/// is reached.
pub fn generate_random(fw: &Framework, count: usize, rng_seed: u64, limits: &GenLimits) -> Pool {
    let mut pool = Pool::from_seeds(fw.seeds());
    let morphisms: Vec<_> = fw.unary_morphisms().map(|m| (m, limits.grid(m))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let budget = ATTEMPTS_PER_CASE.saturating_mul(count);
    let mut added = 0;
    let mut misses = 0;
    while added < count {
        if misses >= budget || pool.is_empty() || morphisms.is_empty() {
            pool.truncated = true;
            break;
        }
        let case = pool.get_index(rng.gen_range(0..pool.len())).expect("in range").clone();
        let (m, grid) = &morphisms[rng.gen_range(0..morphisms.len())];
        let params = &grid[rng.gen_range(0..grid.len())];

        let produced = (case.lineage.depth() < limits.max_depth)
            .then(|| m.apply(std::slice::from_ref(&case.datum), params).ok())
            .flatten();
        let Some(datum) = produced else {
            misses += 1;
            continue;
        };
        if !pool.contains(&datum.case_id()) && pool.len() >= limits.max_pool_size {
            pool.truncated = true;
            break;
        }
        let lineage = case.lineage.extended(Step::unary(m.name(), params.clone()));
        if pool.insert_or_alias(TestCase::derived(datum, lineage)) == Insertion::New {
            added += 1;
            misses = 0;
        } else {
            misses += 1;
        }
    }
    pool
}
