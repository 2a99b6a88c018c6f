// Genetic search for large outputs under repeated doubling.

use std::error::Error;

use morphtest::strategies::{generate_optimal, GaConfig};
use morphtest::subjects::doubling_framework;

pub fn run() -> Result<(), Box<dyn Error>> {
    let fw = doubling_framework(vec![1.0, 3.0]);
    let cfg = GaConfig::new(4, 20, "max_numeric").with_rng_seed(11);
    let result = generate_optimal(&fw, &cfg, None)?;
    for (g, best) in result.trace.iter().enumerate().step_by(5) {
        println!("generation {g:2}: best {best}");
    }
    println!("final pool:");
    for case in result.pool.iter() {
        println!("  {} (depth {})", case.datum, case.lineage.depth());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
