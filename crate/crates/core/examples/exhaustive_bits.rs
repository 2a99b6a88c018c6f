// Closure of a 3-bit seed under three idempotent set-bit datamorphisms.

use std::error::Error;

use morphtest::strategies::{generate_exhaustive, GenLimits};
use morphtest::subjects::bits_framework;

pub fn run() -> Result<(), Box<dyn Error>> {
    let fw = bits_framework(3);
    let pool = generate_exhaustive(&fw, &GenLimits::default());
    println!("{} cases, {} alias lineages, truncated: {}", pool.len(), pool.alias_count(), pool.truncated);
    for case in pool.iter() {
        let path: Vec<&str> = case.lineage.morphism_names().collect();
        println!("  {}  {}", case.datum, if path.is_empty() { "(seed)".into() } else { path.join(" -> ") });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
