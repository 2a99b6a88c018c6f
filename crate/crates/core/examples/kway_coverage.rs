// Builds 2-way complete pools and measures coverage of smaller pools.

use std::error::Error;

use morphtest::model::Pool;
use morphtest::strategies::{generate_kway, measure_kway_coverage, GenLimits, KwayConfig};
use morphtest::subjects::bits_framework;

pub fn run() -> Result<(), Box<dyn Error>> {
    let fw = bits_framework(3);
    let seeds_only = Pool::from_seeds(fw.seeds());
    for k in 0..=2 {
        let cfg = KwayConfig::new(k);
        let pool = generate_kway(&fw, &cfg, &GenLimits::default())?;
        let cov = measure_kway_coverage(&pool, &fw, &cfg);
        let bare = measure_kway_coverage(&seeds_only, &fw, &cfg);
        println!(
            "k={k}: {} cases, {} aliases, coverage {:?}; seeds alone {:?}",
            pool.len(),
            pool.alias_count(),
            cov.per_n,
            bare.per_n
        );
    }
    let distinct = KwayConfig { k: 2, distinct_only: true };
    let pool = generate_kway(&fw, &distinct, &GenLimits::default())?;
    println!("distinct pairs only: {} cases", pool.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
