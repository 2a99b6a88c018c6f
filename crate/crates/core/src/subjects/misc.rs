use crate::model::{Datamorphism, Datum, DatumKind, Framework};
use crate::runner::Subject;

/// Returns its input unchanged.
pub fn echo() -> Subject {
    Subject::in_process("echo", |d| Ok(d.clone()))
}

/// Numbers under `double(x) = 2x`.
pub fn doubling_framework(seeds: Vec<f64>) -> Framework {
    Framework::new(
        "doubling",
        DatumKind::Number,
        seeds.into_iter().map(Datum::Number).collect(),
        vec![Datamorphism::unary("double", |d| match d {
            Datum::Number(x) => Datum::Number(2.0 * x),
            other => other.clone(),
        })
        .with_condition(|args, _| matches!(args[0], Datum::Number(_)))],
        vec![],
    )
    .expect("bundled doubling framework is well formed")
}

/// Bit strings of `width` with one idempotent `set<i>` datamorphism per
/// position, seeded with all zeros.
pub fn bits_framework(width: usize) -> Framework {
    let morphisms = (0..width)
        .map(|i| {
            Datamorphism::unary(format!("set{i}"), move |d| match d {
                Datum::Bits(b) => {
                    let mut b = b.clone();
                    b[i] = true;
                    Datum::Bits(b)
                }
                other => other.clone(),
            })
            .with_condition(move |args, _| matches!(&args[0], Datum::Bits(b) if b.len() > i))
        })
        .collect();
    Framework::new(
        "bits",
        DatumKind::Bits { width: Some(width) },
        vec![Datum::Bits(vec![false; width])],
        morphisms,
        vec![],
    )
    .expect("bundled bits framework is well formed")
}
