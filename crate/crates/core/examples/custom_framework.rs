// A hand-written framework: a vector-sum program with a permutation and a
// parameterised scaling, and two metamorphisms over them.

use std::error::Error;

use morphtest::model::{Datamorphism, Datum, DatumKind, Framework, Metamorphism, MorphParams, ParamSpec};
use morphtest::runner::{check_metamorphisms, execute_pool, Subject};
use morphtest::strategies::{generate_kway, GenLimits, KwayConfig};

fn framework() -> Result<Framework, Box<dyn Error>> {
    let reverse = Datamorphism::unary("reverse", |d| {
        let mut v = d.as_vector().unwrap_or_default().to_vec();
        v.reverse();
        Datum::NumVector(v)
    });
    let scale = Datamorphism::new("scale", 1, |args, p| {
        let k = p.number("factor").unwrap_or(1.0);
        Datum::NumVector(args[0].as_vector().unwrap_or_default().iter().map(|x| k * x).collect())
    })
    .with_params(vec![ParamSpec::number("factor", 2.0, Some((-10.0, 10.0)))]);

    let sum_times = |k: f64| {
        move |base: &Datum, mutants: &[Datum], tol: f64| match (base, &mutants[0]) {
            (Datum::Number(a), Datum::Number(b)) => (k * a - b).abs() <= tol,
            _ => false,
        }
    };
    let triple = MorphParams::new().with("factor", Datum::Number(3.0));
    Ok(Framework::new(
        "vector_sum",
        DatumKind::NumVector { len: None },
        vec![Datum::NumVector(vec![1.0, 2.5, -4.0]), Datum::NumVector((1..=7).map(f64::from).collect())],
        vec![reverse, scale],
        vec![
            Metamorphism::equal_outputs("sum_permutation", "reverse"),
            Metamorphism::new("sum_scales", vec![("scale".into(), triple)], sum_times(3.0)),
        ],
    )?)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let fw = framework()?;
    let mut limits = GenLimits::default();
    limits.param_grid.insert("scale".into(), vec![MorphParams::new().with("factor", Datum::Number(3.0))]);
    let pool = generate_kway(&fw, &KwayConfig::new(1), &limits)?;

    let sum = Subject::in_process("sum", |d| Ok(Datum::Number(d.as_vector().ok_or("not a vector")?.iter().sum())));
    // drops the last element of long inputs
    let buggy = Subject::in_process("buggy_sum", |d| {
        let v = d.as_vector().ok_or("not a vector")?;
        Ok(Datum::Number(v.iter().take(5).sum()))
    });
    for subject in [sum, buggy] {
        let report = check_metamorphisms(&fw, &pool, &execute_pool(&subject, &pool, 1)?);
        for (name, c) in &report.summary {
            println!("{:>9} {name:>16}: pass {} fail {}", subject.name, c.pass, c.fail);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
