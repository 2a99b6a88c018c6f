// Drives a subject in another process over the line protocol. The subject
// here is a one-line sed program that turns each request into an echo.

use std::error::Error;

use morphtest::model::{Datum, Pool, TestCase};
use morphtest::runner::{execute_pool, ExternalSpec, Subject};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut spec = ExternalSpec::new(vec!["sh".into(), "-c".into(), r#"exec sed -u 's/"input":/"output":/'"#.into()]);
    spec.timeout_ms = 2000;
    let subject = Subject::external("sed-echo", spec);

    let seeds: Vec<TestCase> = ["ada", "grace", "edsger"].map(|s| TestCase::seed(Datum::Text(s.into()))).to_vec();
    let pool = Pool::from_seeds(&seeds);
    for record in execute_pool(&subject, &pool, 2)? {
        println!("{} -> {:?}", record.case_id, record.outcome);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
