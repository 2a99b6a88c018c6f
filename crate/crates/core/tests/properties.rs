//! Property suites checked against independent reference computations.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use morphtest::analytics::{describe, emit_report, parse_csv_table, pearson, summarize, MetricTable, ReportFormat};
use morphtest::model::{Datamorphism, Datum, DatumKind, Framework, Lineage, Pool, TestCase};
use morphtest::strategies::{generate_exhaustive, generate_kway, measure_kway_coverage, GenLimits, KwayConfig};
use proptest::prelude::*;

fn datum() -> impl Strategy<Value = Datum> {
    let leaf = prop_oneof![
        any::<f64>().prop_map(Datum::Number),
        ".{0,12}".prop_map(Datum::Text),
        prop::collection::vec(any::<bool>(), 0..20).prop_map(Datum::Bits),
        prop::collection::vec(any::<f64>(), 0..6).prop_map(Datum::NumVector),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop::collection::btree_map("[a-z]{1,4}", inner, 0..4).prop_map(Datum::Record)
    })
}

proptest! {
    #[test]
    fn canonical_encoding_round_trips(d in datum()) {
        let bytes = d.canonical_bytes();
        let back = Datum::decode(&bytes).unwrap();
        prop_assert_eq!(back.canonical_bytes(), bytes);
        prop_assert_eq!(back.case_id(), d.case_id());
    }

    #[test]
    fn json_form_round_trips(d in datum()) {
        let text = serde_json::to_string(&d).unwrap();
        let back: Datum = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.case_id(), d.case_id());
    }

    #[test]
    fn pool_dedups_by_datum(xs in prop::collection::vec(-3i32..3, 0..30)) {
        let mut pool = Pool::new();
        for x in &xs {
            pool.insert(TestCase::seed(Datum::Number(*x as f64)));
        }
        let distinct: BTreeSet<i32> = xs.iter().copied().collect();
        prop_assert_eq!(pool.len(), distinct.len());
    }

    #[test]
    fn welford_matches_two_pass(values in prop::collection::vec(prop::option::weighted(0.9, -1e3f64..1e3), 0..60)) {
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        let s = describe(values.iter().copied(), false);
        prop_assert_eq!(s.count + s.missing, values.len());
        if present.is_empty() {
            prop_assert!(s.mean.is_none());
        } else {
            let n = present.len() as f64;
            let mean = present.iter().sum::<f64>() / n;
            prop_assert!((s.mean.unwrap() - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            if present.len() > 1 {
                let var = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                prop_assert!((s.stddev.unwrap() - sd).abs() <= 1e-9 * sd.max(1.0));
            }
        }
    }

    #[test]
    fn pearson_symmetric_and_affine_invariant(
        pts in prop::collection::vec((-100f64..100.0, -100f64..100.0), 3..20),
        a in 0.1f64..10.0,
        b in -50f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-10);
            let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            if let Ok(r2) = pearson(&scaled, &y) {
                prop_assert!((r2 - r).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn csv_report_recovers_cells(cells in prop::collection::vec(prop::collection::vec(prop::option::of(-1e6f64..1e6), 3), 1..6)) {
        let table = MetricTable {
            rows: (0..cells.len()).map(|i| format!("s{i}")).collect(),
            columns: vec!["a".into(), "b".into(), "c".into()],
            cells,
        };
        let bytes = emit_report(&table, &summarize(&table, false), None, serde_json::Value::Null, ReportFormat::Csv).unwrap();
        let back = parse_csv_table(&bytes).unwrap();
        prop_assert_eq!(back.cells.len(), table.cells.len());
        for (r, s) in back.cells.iter().flatten().zip(table.cells.iter().flatten()) {
            prop_assert_eq!(r.map(f64::to_bits), s.map(f64::to_bits));
        }
    }
}

fn set_bit(i: usize) -> Datamorphism {
    Datamorphism::unary(format!("set{i}"), move |d| match d {
        Datum::Bits(b) => {
            let mut b = b.clone();
            b[i] = true;
            Datum::Bits(b)
        }
        other => other.clone(),
    })
}

/// Closure by plain BFS over raw bit vectors.
fn brute_closure(seed: Vec<bool>, set: &[usize]) -> BTreeSet<Vec<bool>> {
    let mut seen = BTreeSet::from([seed.clone()]);
    let mut queue = VecDeque::from([seed]);
    while let Some(v) = queue.pop_front() {
        for &i in set {
            let mut w = v.clone();
            w[i] = true;
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    seen
}

#[test]
fn exhaustive_matches_brute_force_closure() {
    for mask in 0u8..8 {
        let set: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
        for seed_bits in 0u8..8 {
            let seed: Vec<bool> = (0..3).map(|i| seed_bits & (1 << i) != 0).collect();
            let fw = Framework::new(
                "bits",
                DatumKind::Bits { width: Some(3) },
                vec![Datum::Bits(seed.clone())],
                set.iter().map(|&i| set_bit(i)).collect(),
                vec![],
            )
            .unwrap();
            let pool = generate_exhaustive(&fw, &GenLimits::default());
            let got: HashSet<_> = pool.ids().copied().collect();
            let want: HashSet<_> = brute_closure(seed, &set).into_iter().map(|b| Datum::Bits(b).case_id()).collect();
            assert_eq!(got, want, "set {set:?}");
        }
    }
}

/// Independent coverage scan: for each (seed, tuple), look for any lineage
/// whose reversed morphism sequence contains the tuple as a subsequence.
fn brute_coverage(pool: &Pool, names: &[String], seeds: &[TestCase], k: usize) -> Vec<f64> {
    let lineages: Vec<&Lineage> = pool.all_lineages().map(|(_, l)| l).collect();
    let is_subseq = |needle: &[&str], hay: &[&str]| {
        let mut it = hay.iter();
        needle.iter().all(|n| it.any(|h| h == n))
    };
    let mut out = vec![seeds.iter().filter(|s| pool.contains(&s.id)).count() as f64 / seeds.len() as f64];
    for n in 1..=k {
        let tuples: Vec<Vec<&str>> = itertools::Itertools::multi_cartesian_product((0..n).map(|_| names.iter().map(String::as_str)))
            .collect();
        let mut hit = 0;
        for s in seeds {
            for t in &tuples {
                let covered = lineages.iter().any(|l| {
                    let rev: Vec<&str> = l.steps.iter().rev().map(|st| st.morphism.as_str()).collect();
                    l.seed_id == s.id && is_subseq(t, &rev)
                });
                hit += covered as usize;
            }
        }
        let total = seeds.len() * tuples.len();
        out.push(if total == 0 { 1.0 } else { hit as f64 / total as f64 });
    }
    out
}

fn kway_framework(seeds: &[String], ops: &[u8]) -> Framework {
    // op kinds: 0 append a letter, 1 set to a constant, 2 identity
    let morphisms = ops
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let name = format!("m{i}");
            let tag = name.clone();
            Datamorphism::unary(name, move |d| {
                let t = d.as_text().unwrap();
                Datum::Text(match kind {
                    0 => format!("{t}{tag}"),
                    1 => tag.clone(),
                    _ => t.to_string(),
                })
            })
        })
        .collect();
    Framework::new(
        "rand",
        DatumKind::Text,
        seeds.iter().map(|s| Datum::Text(s.clone())).collect(),
        morphisms,
        vec![],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kway_coverage_agrees_with_brute_force(
        nseeds in 1usize..=2,
        ops in prop::collection::vec(0u8..3, 1..=3),
        k in 0usize..=3,
        extra in prop::collection::vec((0usize..2, prop::collection::vec(0usize..3, 1..4)), 0..6),
    ) {
        let seeds: Vec<String> = (0..nseeds).map(|i| format!("s{i}")).collect();
        let fw = kway_framework(&seeds, &ops);
        let names: Vec<String> = fw.morphisms().iter().map(|m| m.name().to_string()).collect();
        let cfg = KwayConfig::new(k);

        let pool = generate_kway(&fw, &cfg, &GenLimits::default()).unwrap();
        let cov = measure_kway_coverage(&pool, &fw, &cfg);
        prop_assert!(cov.per_n.iter().all(|&c| c == 1.0), "{:?}", cov);
        prop_assert_eq!(&cov.per_n, &brute_coverage(&pool, &names, fw.seeds(), k));

        // A partial pool: seeds plus a few arbitrary chains.
        let mut partial = Pool::from_seeds(fw.seeds());
        for (si, chain) in &extra {
            let seed = &fw.seeds()[si % nseeds];
            let (mut d, mut l) = (seed.datum.clone(), seed.lineage.clone());
            for &m in chain {
                let m = &fw.morphisms()[m % names.len()];
                d = m.apply(std::slice::from_ref(&d), &m.default_params()).unwrap();
                l = l.extended(morphtest::model::Step::unary(m.name(), m.default_params()));
            }
            partial.insert_or_alias(TestCase::derived(d, l));
        }
        let cov = measure_kway_coverage(&partial, &fw, &cfg);
        prop_assert_eq!(&cov.per_n, &brute_coverage(&partial, &names, fw.seeds(), k));
        prop_assert_eq!(cov.aggregate, cov.per_n.iter().copied().fold(1.0, f64::min));
    }
}

#[test]
fn seeds_in_record_keys_are_order_independent() {
    let a: BTreeMap<String, Datum> = [("b".to_string(), Datum::Number(1.0)), ("a".to_string(), Datum::Text("x".into()))].into();
    let d1 = Datum::Record(a.clone());
    let d2 = Datum::record([("a", Datum::Text("x".into())), ("b", Datum::Number(1.0))]);
    assert_eq!(d1.case_id(), d2.case_id());
}
