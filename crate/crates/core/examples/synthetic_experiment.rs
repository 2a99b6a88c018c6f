// The synthetic recognizer experiment: 13 attribute edits per seed, a
// score table with summary footers, and verdicts against the 80 threshold.

use std::error::Error;

use morphtest::analytics::{build_metric_table, emit_report, summarize, ReportFormat};
use morphtest::model::Datum;
use morphtest::runner::{check_metamorphisms, execute_pool};
use morphtest::strategies::{generate_kway, GenLimits, KwayConfig};
use morphtest::subjects::{synthetic_recognizer, SyntheticOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let opts = SyntheticOptions { seeds: 8, error_fraction: 0.1, ..Default::default() };
    let (subject, fw) = synthetic_recognizer(&opts);
    let pool = generate_kway(&fw, &KwayConfig::new(1), &GenLimits::default())?;
    let records = execute_pool(&subject, &pool, 2)?;
    let report = check_metamorphisms(&fw, &pool, &records);

    let table = build_metric_table(&pool, &records, Datum::as_number)?;
    let summary = summarize(&table, false);
    let csv = emit_report(&table, &summary, None, serde_json::Value::Null, ReportFormat::Csv)?;
    print!("{}", String::from_utf8(csv)?);
    let t = report.totals();
    println!("verdicts: pass {} fail {} error {}", t.pass, t.fail, t.error);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
