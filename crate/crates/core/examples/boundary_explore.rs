// Locates a classifier's decision threshold by midpoint probing.

use std::error::Error;

use morphtest::model::Datum;
use morphtest::strategies::{explore_boundary, ExploreConfig};
use morphtest::subjects::{mid, threshold_classifier};

pub fn run() -> Result<(), Box<dyn Error>> {
    let subject = threshold_classifier(0.37);
    let r = explore_boundary(&subject, &Datum::Number(0.0), &Datum::Number(1.0), &mid(), &ExploreConfig::new(1e-6))?;
    println!("{} iterations", r.iterations);
    println!("lo = {} -> {}", r.lo.datum, r.lo_class);
    println!("hi = {} -> {}", r.hi.datum, r.hi_class);

    // vectors bisect along the segment between the endpoints
    let plane = morphtest::runner::Subject::in_process("plane", |d| {
        let v = d.as_vector().ok_or("expected a vector")?;
        Ok(Datum::Text(if v[0] + v[1] < 1.0 { "below" } else { "above" }.into()))
    });
    let r = explore_boundary(
        &plane,
        &Datum::NumVector(vec![0.0, 0.0]),
        &Datum::NumVector(vec![2.0, 1.0]),
        &mid(),
        &ExploreConfig::new(1e-4),
    )?;
    println!("plane crossing near {} after {} iterations", r.hi.datum, r.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
