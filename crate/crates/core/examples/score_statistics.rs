// Summary statistics and correlation across four recognizers' overall
// averages with and without a face mask.

use std::error::Error;

use morphtest::analytics::{describe, pearson};

pub fn run() -> Result<(), Box<dyn Error>> {
    let services = ["Tencent", "Baidu", "Face++", "SeetaFace"];
    let with_mask = [99.70, 94.75, 93.03, 80.32];
    let without = [96.38, 84.50, 86.81, 63.57];
    for ((name, a), b) in services.iter().zip(with_mask).zip(without) {
        println!("{name:>10}: {a:6.2} {b:6.2}");
    }
    let s = describe(with_mask.map(Some), false);
    println!("mean {:.4}, sd {:.4}", s.mean.unwrap_or(f64::NAN), s.stddev.unwrap_or(f64::NAN));
    println!("pearson r = {:.4}", pearson(&with_mask, &without)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
