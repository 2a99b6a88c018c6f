use super::GenLimits;
use crate::model::{Framework, Insertion, Pool, Step, TestCase};

/// Closes the seed set under every unary datamorphism and grid parameter.
///
/// Cases are expanded in insertion order, each once, so the pool reaches the
/// fixpoint unless `max_pool_size` or `max_depth` cut it short, in which case
/// `truncated` is set.
pub fn generate_exhaustive(fw: &Framework, limits: &GenLimits) -> Pool {
    let mut pool = Pool::from_seeds(fw.seeds());
    let morphisms: Vec<_> = fw
        .unary_morphisms()
        .map(|m| (m, limits.grid(m)))
        .collect();

    let mut next = 0;
    'expand: while let Some(case) = pool.get_index(next).cloned() {
        next += 1;
        let at_depth_limit = case.lineage.depth() >= limits.max_depth;
        for (m, grid) in &morphisms {
            for params in grid {
                let Ok(datum) = m.apply(std::slice::from_ref(&case.datum), params) else {
                    continue;
                };
                let fresh = !pool.contains(&datum.case_id());
                if fresh && (at_depth_limit || pool.len() >= limits.max_pool_size) {
                    pool.truncated = true;
                    if !at_depth_limit {
                        break 'expand;
                    }
                    continue;
                }
                if at_depth_limit {
                    continue;
                }
                let lineage = case.lineage.extended(Step::unary(m.name(), params.clone()));
                let inserted = pool.insert_or_alias(TestCase::derived(datum, lineage));
                debug_assert!(fresh == (inserted == Insertion::New));
            }
        }
    }
    pool
}
