//! Output-adaptive boundary exploration between two differently classified
//! inputs.

use serde::{Deserialize, Serialize};

use super::StrategyError;
use crate::model::{Datamorphism, Datum, Lineage, MorphParams, Step, TestCase};
use crate::runner::{Outcome, Session, Subject};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Absolute difference for numbers, Euclidean for vectors, Hamming for
    /// bits, discrete for text, summed over record fields.
    #[default]
    Auto,
    Euclidean,
    Manhattan,
}

/// Distance between two datums; `inf` for incomparable shapes.
pub fn distance(metric: Distance, a: &Datum, b: &Datum) -> f64 {
    match (a, b) {
        (Datum::Number(x), Datum::Number(y)) => (x - y).abs(),
        (Datum::NumVector(x), Datum::NumVector(y)) if x.len() == y.len() => {
            let diffs = x.iter().zip(y).map(|(p, q)| (p - q).abs());
            match metric {
                Distance::Manhattan => diffs.sum(),
                Distance::Auto | Distance::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            }
        }
        (Datum::Bits(x), Datum::Bits(y)) if x.len() == y.len() => x.iter().zip(y).filter(|(p, q)| p != q).count() as f64,
        (Datum::Text(x), Datum::Text(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        (Datum::Record(x), Datum::Record(y)) if x.len() == y.len() && x.keys().eq(y.keys()) => {
            x.values().zip(y.values()).map(|(p, q)| distance(metric, p, q)).sum()
        }
        _ => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploreConfig {
    pub epsilon: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub distance: Distance,
}

fn default_iterations() -> usize {
    64
}

impl ExploreConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iterations: default_iterations(),
            distance: Distance::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploreResult {
    /// Endpoint sharing the class of the starting point `a`.
    pub lo: TestCase,
    /// Endpoint sharing the class of the starting point `b`.
    pub hi: TestCase,
    pub lo_class: Datum,
    pub hi_class: Datum,
    pub iterations: usize,
    /// `a`, `b`, then every probed midpoint in order. Probe lineages are
    /// rooted at `a` or `b` and reference the other argument by id.
    pub trace: Vec<TestCase>,
    /// Retained (lo, hi) pair after each iteration.
    pub intervals: Vec<(Datum, Datum)>,
}

fn classify(session: &mut Session, d: &Datum) -> Result<Datum, StrategyError> {
    match session.evaluate_one(d)? {
        Outcome::Output(out) => Ok(out),
        Outcome::SubjectError(message) => Err(StrategyError::SubjectFailed {
            input: d.to_string(),
            message,
        }),
        Outcome::Timeout => Err(StrategyError::SubjectFailed {
            input: d.to_string(),
            message: "timeout".into(),
        }),
    }
}

/// Repeated midpoint probing: with endpoints `x` (class of `a`) and `y`
/// (class of `b`), probe `c = mid(x, y)`; if `c` is classified differently
/// from `x` it replaces `y`, otherwise it replaces `x`. Stops when the
/// endpoints are within `epsilon`.
pub fn explore_boundary(
    subject: &Subject,
    a: &Datum,
    b: &Datum,
    mid: &Datamorphism,
    cfg: &ExploreConfig,
) -> Result<ExploreResult, StrategyError> {
    if mid.arity() != 2 {
        return Err(StrategyError::InvalidConfig(format!(
            "boundary exploration needs a binary datamorphism, {} has arity {}",
            mid.name(),
            mid.arity()
        )));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(StrategyError::InvalidConfig(format!("epsilon must be positive, got {}", cfg.epsilon)));
    }

    let mut session = subject.session(1)?;
    let class_a = classify(&mut session, a)?;
    let class_b = classify(&mut session, b)?;
    if class_a == class_b {
        return Err(StrategyError::SameClass(class_a.to_string()));
    }

    let mut lo = TestCase::seed(a.clone());
    let mut hi = TestCase::seed(b.clone());
    let mut trace = vec![lo.clone(), hi.clone()];
    let mut intervals = Vec::new();
    let params = mid.default_params();

    let mut iterations = 0;
    let mut gap = distance(cfg.distance, &lo.datum, &hi.datum);
    while gap > cfg.epsilon && iterations < cfg.max_iterations {
        let probe = mid.apply(&[lo.datum.clone(), hi.datum.clone()], &params)?;
        let lineage = probe_lineage(&lo.lineage, hi.id, mid.name(), &params);
        let c = TestCase::derived(probe, lineage);
        let class_c = classify(&mut session, &c.datum)?;
        iterations += 1;
        trace.push(c.clone());
        if class_c != class_a {
            hi = c;
        } else {
            lo = c;
        }
        intervals.push((lo.datum.clone(), hi.datum.clone()));
        gap = distance(cfg.distance, &lo.datum, &hi.datum);
    }
    if gap > cfg.epsilon {
        return Err(StrategyError::NoConvergence { iterations, distance: gap });
    }
    Ok(ExploreResult {
        lo,
        hi,
        lo_class: class_a,
        hi_class: class_b,
        iterations,
        trace,
        intervals,
    })
}

fn probe_lineage(first: &Lineage, second: crate::model::CaseId, mid: &str, params: &MorphParams) -> Lineage {
    first.extended(Step {
        morphism: mid.to_string(),
        params: params.clone(),
        args: vec![second],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid() -> Datamorphism {
        Datamorphism::new("mid", 2, |args, _| {
            Datum::Number((args[0].as_number().unwrap() + args[1].as_number().unwrap()) / 2.0)
        })
    }

    fn classifier(t: f64) -> Subject {
        Subject::in_process("classifier", move |d| {
            let x = d.as_number().ok_or("not a number")?;
            Ok(Datum::Text(if x < t { "A" } else { "B" }.into()))
        })
    }

    fn num(d: &Datum) -> f64 {
        d.as_number().unwrap()
    }

    #[test]
    fn halves_down_to_epsilon() {
        // 2^-10 < 1e-3 <= 2^-9
        let r = explore_boundary(
            &classifier(0.5),
            &Datum::Number(0.0),
            &Datum::Number(1.0),
            &mid(),
            &ExploreConfig::new(1e-3),
        )
        .unwrap();
        assert_eq!(r.iterations, 10);
        let (lo, hi) = (num(&r.lo.datum), num(&r.hi.datum));
        assert!(hi - lo <= 1e-3);
        assert!(lo <= 0.5 && 0.5 <= hi);
        assert_eq!(r.trace.len(), 12);
    }

    #[test]
    fn same_class_is_rejected() {
        let err = explore_boundary(
            &classifier(5.0),
            &Datum::Number(0.0),
            &Datum::Number(1.0),
            &mid(),
            &ExploreConfig::new(1e-3),
        )
        .unwrap_err();
        assert!(matches!(err, StrategyError::SameClass(_)));
    }

    #[test]
    fn already_close_returns_immediately() {
        let r = explore_boundary(
            &classifier(1e-7),
            &Datum::Number(0.0),
            &Datum::Number(2f64.powi(-20)),
            &mid(),
            &ExploreConfig::new(1.0),
        )
        .unwrap();
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let mut cfg = ExploreConfig::new(1e-12);
        cfg.max_iterations = 5;
        let err = explore_boundary(&classifier(0.5), &Datum::Number(0.0), &Datum::Number(1.0), &mid(), &cfg)
            .unwrap_err();
        assert!(matches!(err, StrategyError::NoConvergence { iterations: 5, .. }));
    }

    #[test]
    fn subject_errors_propagate() {
        let broken = Subject::in_process("broken", |_| Err("down".into()));
        let err = explore_boundary(&broken, &Datum::Number(0.0), &Datum::Number(1.0), &mid(), &ExploreConfig::new(0.1))
            .unwrap_err();
        assert!(matches!(err, StrategyError::SubjectFailed { .. }));
    }

    #[test]
    fn straddles_and_halves_every_step() {
        let subject = classifier(0.3);
        let r = explore_boundary(&subject, &Datum::Number(0.0), &Datum::Number(1.0), &mid(), &ExploreConfig::new(1e-6))
            .unwrap();
        let mut prev = 1.0;
        for (lo, hi) in &r.intervals {
            assert_ne!(subject.invoke(lo).unwrap(), subject.invoke(hi).unwrap());
            let gap = (num(hi) - num(lo)).abs();
            assert!(gap <= prev / 2.0);
            prev = gap;
        }
        assert!(num(&r.lo.datum) <= 0.3 && 0.3 <= num(&r.hi.datum));
    }

    #[test]
    fn distances() {
        assert_eq!(distance(Distance::Auto, &Datum::NumVector(vec![0.0, 0.0]), &Datum::NumVector(vec![3.0, 4.0])), 5.0);
        assert_eq!(
            distance(Distance::Manhattan, &Datum::NumVector(vec![0.0, 0.0]), &Datum::NumVector(vec![3.0, 4.0])),
            7.0
        );
        assert_eq!(
            distance(Distance::Auto, &Datum::bits_from_str("0110").unwrap(), &Datum::bits_from_str("0011").unwrap()),
            2.0
        );
        assert!(distance(Distance::Auto, &Datum::Number(0.0), &Datum::Text("x".into())).is_infinite());
    }
}
