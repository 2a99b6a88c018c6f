use crate::model::{Datamorphism, Datum, DatumKind, Framework};
use crate::runner::Subject;

/// "A" below `t`, "B" from `t` upwards.
pub fn threshold_classifier(t: f64) -> Subject {
    Subject::in_process(format!("classifier:{t}"), move |d| match d {
        Datum::Number(x) => Ok(Datum::Text(if *x < t { "A" } else { "B" }.into())),
        other => Err(format!("expected a number, got {other}")),
    })
}

/// Mid(x, y) = (x + y) / 2 for numbers, componentwise for vectors.
pub fn mid() -> Datamorphism {
    Datamorphism::new("mid", 2, |args, _| match (&args[0], &args[1]) {
        (Datum::Number(x), Datum::Number(y)) => Datum::Number(x + (y - x) / 2.0),
        (Datum::NumVector(x), Datum::NumVector(y)) => {
            Datum::NumVector(x.iter().zip(y).map(|(a, b)| a + (b - a) / 2.0).collect())
        }
        (a, _) => a.clone(),
    })
    .with_condition(|args, _| match (&args[0], &args[1]) {
        (Datum::Number(_), Datum::Number(_)) => true,
        (Datum::NumVector(x), Datum::NumVector(y)) => x.len() == y.len(),
        _ => false,
    })
}

/// Two seeds, 0 and 1, and the binary `mid` datamorphism.
pub fn classifier_framework(seeds: Vec<f64>) -> Framework {
    Framework::new(
        "classifier",
        DatumKind::Number,
        seeds.into_iter().map(Datum::Number).collect(),
        vec![mid()],
        vec![],
    )
    .expect("bundled classifier framework is well formed")
}
