// Checks a correct and a faulty sine implementation against
// sin(x) = sin(π − x) on 1000 seeds in [0, π].

use std::error::Error;

use morphtest::runner::{check_metamorphisms, execute_pool};
use morphtest::strategies::{generate_kway, GenLimits, KwayConfig};
use morphtest::subjects::{sine_correct, sine_faulty, sine_framework};

pub fn run() -> Result<(), Box<dyn Error>> {
    let fw = sine_framework(1000);
    let pool = generate_kway(&fw, &KwayConfig::new(1), &GenLimits::default())?;
    for subject in [sine_correct(), sine_faulty()] {
        let records = execute_pool(&subject, &pool, 4)?;
        let t = check_metamorphisms(&fw, &pool, &records).totals();
        println!("{:>12}: pass {:4}  fail {:4}", subject.name, t.pass, t.fail);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
