// Seeded random generation with a parameter grid, written as a pool file.

use std::error::Error;

use morphtest::io::{read_pool, write_pool, PoolHeader};
use morphtest::model::{Datum, MorphParams};
use morphtest::strategies::{generate_random, GenLimits};
use morphtest::subjects::{BuiltinOptions, FrameworkSpec, SyntheticOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let options = BuiltinOptions { synthetic: SyntheticOptions { seeds: 5, ..Default::default() }, ..Default::default() };
    let spec = FrameworkSpec::bundled("synth_recognizer", options);
    let fw = spec.build()?;

    let mut limits = GenLimits::default().with_max_depth(3);
    let deltas = [0.05, 0.13, 0.3].map(|d| MorphParams::new().with("delta", Datum::Number(d)));
    limits.param_grid.insert("Smiling".into(), deltas.to_vec());

    let pool = generate_random(&fw, 40, 7, &limits);
    let mut file = Vec::new();
    write_pool(&mut file, &PoolHeader::new(spec, serde_json::json!({"name": "random", "count": 40}), &pool), &pool)?;
    let (header, back) = read_pool(file.as_slice())?;
    println!("{} cases, {} bytes, reread {} (truncated: {})", pool.len(), file.len(), back.len(), header.truncated);
    let deepest = pool.iter().max_by_key(|c| c.lineage.depth()).unwrap();
    println!("deepest: {:?}", deepest.lineage.morphism_names().collect::<Vec<_>>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
