use std::f64::consts::PI;

use crate::model::{Datamorphism, Datum, DatumKind, Framework, Metamorphism};
use crate::runner::Subject;

pub const SINE_TOLERANCE: f64 = 1e-9;

/// `n` evenly spaced points over [0, π], both ends included.
pub fn linspace_0_pi(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn reflect() -> Datamorphism {
    Datamorphism::unary("reflect", |d| match d {
        Datum::Number(x) => Datum::Number(PI - x),
        other => other.clone(),
    })
    .with_condition(|args, _| matches!(args[0], Datum::Number(_)))
}

/// sin(x) = sin(π − x), checked through the `reflect` datamorphism.
pub fn sine_framework(points: usize) -> Framework {
    sine_framework_with_seeds(linspace_0_pi(points))
}

pub fn sine_framework_with_seeds(seeds: Vec<f64>) -> Framework {
    Framework::new(
        "sine",
        DatumKind::Number,
        seeds.into_iter().map(Datum::Number).collect(),
        vec![reflect()],
        vec![Metamorphism::equal_outputs("sin_reflect", "reflect").with_tolerance(SINE_TOLERANCE)],
    )
    .expect("bundled sine framework is well formed")
}

fn numeric(name: &'static str, f: fn(f64) -> f64) -> Subject {
    Subject::in_process(name, move |d| match d {
        Datum::Number(x) => Ok(Datum::Number(f(*x))),
        other => Err(format!("expected a number, got {other}")),
    })
}

pub fn sine_correct() -> Subject {
    numeric("sine_correct", f64::sin)
}

/// sin(x) + 0.001·x: breaks the reflection identity everywhere except π/2.
pub fn sine_faulty() -> Subject {
    numeric("sine_faulty", |x| x.sin() + 0.001 * x)
}
