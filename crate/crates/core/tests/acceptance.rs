//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use itertools::Itertools;
use morphtest::analytics::{build_metric_table, emit_report, pearson, summarize, ReportFormat};
use morphtest::io::{write_pool, PoolHeader};
use morphtest::model::{Datamorphism, Datum, DatumKind, Framework, Lineage, Pool, Step, TestCase};
use morphtest::runner::{check_metamorphisms, execute_pool, ExternalSpec, Outcome, Subject};
use morphtest::strategies::{
    explore_boundary, generate_exhaustive, generate_kway, generate_optimal, generate_random, measure_kway_coverage,
    ExploreConfig, GaConfig, GenLimits, KwayConfig,
};
use morphtest::subjects::{
    mid, sine_correct, sine_faulty, sine_framework, synthetic_recognizer, threshold_classifier,
    BuiltinOptions, FrameworkSpec, SyntheticOptions, ATTRIBUTES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = fn(&mut Produced) -> Verdict;

/// Pools produced along the way, replayed by the last criterion.
#[derive(Default)]
struct Produced {
    pools: Vec<(String, Framework, Pool)>,
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
    Ok(())
}

fn c1_pearson(_: &mut Produced) -> Verdict {
    let start = Instant::now();
    let a = pearson(&[99.70, 94.75, 93.03, 80.32], &[96.38, 84.50, 86.81, 63.57]).map_err(|e| e.to_string())?;
    let b = pearson(&[1.51, 4.28, 2.80, 7.07], &[6.22, 11.85, 6.29, 11.35]).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure!((0.975..=1.0).contains(&a), "overall averages r = {a}");
    ensure!((0.805..=0.835).contains(&b), "stddevs r = {b}");
    Ok(format!("r = {a:.4}, {b:.4}"))
}

fn c2_sine(_: &mut Produced) -> Verdict {
    let start = Instant::now();
    let fw = sine_framework(1000);
    let pool = generate_kway(&fw, &KwayConfig::new(1), &GenLimits::default()).map_err(|e| e.to_string())?;
    let good = check_metamorphisms(&fw, &pool, &execute_pool(&sine_correct(), &pool, 4).map_err(|e| e.to_string())?);
    let bad = check_metamorphisms(&fw, &pool, &execute_pool(&sine_faulty(), &pool, 4).map_err(|e| e.to_string())?);
    within(start.elapsed(), Duration::from_secs(2))?;
    let (g, b) = (good.totals(), bad.totals());
    ensure!(g.fail == 0 && g.pass == 1000, "correct subject: {g:?}");
    // the linspace has no exact pi/2 node, so every seed counts
    let rate = b.fail_rate().unwrap_or(0.0);
    ensure!(b.pass + b.fail == 1000 && rate >= 0.999, "faulty subject: {b:?}");
    Ok(format!("correct 0/1000 fail, faulty fail rate {rate:.4}"))
}

fn c3_bisection(_: &mut Produced) -> Verdict {
    let subject = threshold_classifier(0.5);
    let r = explore_boundary(&subject, &Datum::Number(0.0), &Datum::Number(1.0), &mid(), &ExploreConfig::new(1e-6))
        .map_err(|e| e.to_string())?;
    let (lo, hi) = (r.lo.datum.as_number().unwrap(), r.hi.datum.as_number().unwrap());
    ensure!(r.iterations <= 20, "{} iterations", r.iterations);
    ensure!((hi - lo).abs() <= 1e-6, "gap {}", hi - lo);
    ensure!(lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}] misses 0.5");
    for (i, (l, h)) in r.intervals.iter().enumerate() {
        let cl = subject.invoke(l).map_err(|e| e.to_string())?;
        let ch = subject.invoke(h).map_err(|e| e.to_string())?;
        ensure!(cl != ch, "iteration {} endpoints share a class", i + 1);
    }
    Ok(format!("{} iterations, [{lo}, {hi}]", r.iterations))
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

fn c4_exhaustive(out: &mut Produced) -> Verdict {
    let mut frameworks = 0;
    for set in (0..=3).flat_map(|n| (0..3).combinations(n)) {
        for seed_bits in 0u8..8 {
            let seed: Vec<bool> = (0..3).map(|i| seed_bits & (1 << i) != 0).collect();
            let fw = Framework::new(
                "bits",
                DatumKind::Bits { width: Some(3) },
                vec![Datum::Bits(seed.clone())],
                set.iter().map(|&i| set_bit(i)).collect(),
                vec![],
            )
            .map_err(|e| e.to_string())?;
            let pool = generate_exhaustive(&fw, &GenLimits::default());
            let got: HashSet<_> = pool.ids().copied().collect();
            let want: HashSet<_> = brute_closure(seed, &set).into_iter().map(|b| Datum::Bits(b).case_id()).collect();
            ensure!(got == want, "morphisms {set:?}, seed {seed_bits:03b}: {} vs {}", got.len(), want.len());
            if set.len() == 3 && seed_bits == 0 {
                ensure!(pool.len() == 8, "full closure has {} cases", pool.len());
            }
            frameworks += 1;
            out.pools.push((format!("exhaustive {set:?}/{seed_bits}"), fw, pool));
        }
    }
    Ok(format!("{frameworks} frameworks match BFS"))
}

fn text_framework(seeds: usize, ops: &[u8]) -> Framework {
    // 0 appends a tag, 1 overwrites with a constant, 2 is the identity
    let morphisms = ops
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let tag = format!("m{i}");
            Datamorphism::unary(tag.clone(), move |d| {
                let t = d.as_text().unwrap();
                Datum::Text(match kind {
                    0 => format!("{t}{tag}"),
                    1 => tag.clone(),
                    _ => t.to_string(),
                })
            })
        })
        .collect();
    Framework::new("rand", DatumKind::Text, (0..seeds).map(|i| Datum::Text(format!("s{i}"))).collect(), morphisms, vec![])
        .unwrap()
}

fn scan_coverage(pool: &Pool, fw: &Framework, k: usize) -> Vec<f64> {
    let names: Vec<&str> = fw.morphisms().iter().map(|m| m.name()).collect();
    let lineages: Vec<&Lineage> = pool.all_lineages().map(|(_, l)| l).collect();
    let seeds = fw.seeds();
    let mut out = vec![seeds.iter().filter(|s| pool.contains(&s.id)).count() as f64 / seeds.len() as f64];
    for n in 1..=k {
        let tuples: Vec<Vec<&str>> = (0..n).map(|_| names.iter().copied()).multi_cartesian_product().collect();
        let mut hit = 0usize;
        for s in seeds {
            for t in &tuples {
                hit += lineages.iter().any(|l| {
                    let mut rev = l.steps.iter().rev().map(|st| st.morphism.as_str());
                    l.seed_id == s.id && t.iter().all(|m| rev.any(|h| h == *m))
                }) as usize;
            }
        }
        let total = seeds.len() * tuples.len();
        out.push(if total == 0 { 1.0 } else { hit as f64 / total as f64 });
    }
    out
}

fn c5_kway(out: &mut Produced) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b77);
    for trial in 0..100 {
        let seeds = rng.gen_range(1..=2);
        let ops: Vec<u8> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..3)).collect();
        let k = rng.gen_range(0..=3);
        let fw = text_framework(seeds, &ops);
        let cfg = KwayConfig::new(k);

        let pool = generate_kway(&fw, &cfg, &GenLimits::default()).map_err(|e| e.to_string())?;
        let cov = measure_kway_coverage(&pool, &fw, &cfg);
        ensure!(cov.per_n.iter().all(|&c| c == 1.0), "trial {trial}: generated pool measures {:?}", cov.per_n);
        let scanned = scan_coverage(&pool, &fw, k);
        ensure!(cov.per_n == scanned, "trial {trial}: {:?} vs scanner {:?}", cov.per_n, scanned);

        let mut partial = Pool::from_seeds(fw.seeds());
        for _ in 0..rng.gen_range(0..5) {
            let seed = &fw.seeds()[rng.gen_range(0..seeds)];
            let (mut d, mut l) = (seed.datum.clone(), seed.lineage.clone());
            for _ in 0..rng.gen_range(1..4) {
                let m = &fw.morphisms()[rng.gen_range(0..ops.len())];
                d = m.apply(std::slice::from_ref(&d), &m.default_params()).map_err(|e| e.to_string())?;
                l = l.extended(Step::unary(m.name(), m.default_params()));
            }
            partial.insert_or_alias(TestCase::derived(d, l));
        }
        let cov = measure_kway_coverage(&partial, &fw, &cfg);
        let scanned = scan_coverage(&partial, &fw, k);
        ensure!(cov.per_n == scanned, "trial {trial} partial: {:?} vs scanner {:?}", cov.per_n, scanned);
        out.pools.push((format!("kway trial {trial}"), fw, pool));
    }
    Ok("100 frameworks agree with the scanner".into())
}

fn pool_bytes(spec: &FrameworkSpec, strategy: &str, pool: &Pool) -> Vec<u8> {
    let mut buf = Vec::new();
    let header = PoolHeader::new(spec.clone(), serde_json::json!({ "name": strategy }), pool);
    write_pool(&mut buf, &header, pool).unwrap();
    buf
}

fn c6_determinism(out: &mut Produced) -> Verdict {
    let synth = FrameworkSpec::bundled("synth_recognizer", BuiltinOptions::default());
    let fw = synth.build().map_err(|e| e.to_string())?;
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| pool_bytes(&synth, "random", &generate_random(&fw, 500, 42, &GenLimits::default())))
        .collect();
    ensure!(runs[0] == runs[1], "random pools differ");
    out.pools.push(("random".into(), fw.clone(), generate_random(&fw, 500, 42, &GenLimits::default())));

    let doubling = FrameworkSpec::bundled("doubling", BuiltinOptions::default());
    let dfw = doubling.build().map_err(|e| e.to_string())?;
    let cfg = GaConfig::new(2, 50, "max_numeric").with_rng_seed(42);
    let ga: Vec<_> = (0..2).map(|_| generate_optimal(&dfw, &cfg, None)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure!(
        pool_bytes(&doubling, "optimal", &ga[0].pool) == pool_bytes(&doubling, "optimal", &ga[1].pool),
        "optimal pools differ"
    );
    let trace = &ga[0].trace;
    ensure!(trace.len() == 51, "trace has {} entries", trace.len());
    ensure!(trace.windows(2).all(|w| w[0] <= w[1]), "trace decreases");
    let want = 2f64.powi(50) * dfw.seeds()[0].datum.as_number().unwrap();
    ensure!(*trace.last().unwrap() == want, "final best {} vs {want}", trace.last().unwrap());
    out.pools.push(("optimal".into(), dfw, ga[0].pool.clone()));
    Ok(format!("byte-identical pools, best {want:e}"))
}

fn c7_synthetic(out: &mut Produced) -> Verdict {
    let start = Instant::now();
    let (subject, fw) = synthetic_recognizer(&SyntheticOptions::default());
    let pool = generate_kway(&fw, &KwayConfig::new(1), &GenLimits::default()).map_err(|e| e.to_string())?;
    let records = execute_pool(&subject, &pool, 4).map_err(|e| e.to_string())?;
    let table = build_metric_table(&pool, &records, Datum::as_number).map_err(|e| e.to_string())?;
    ensure!(table.rows.len() == 200 && table.columns == ATTRIBUTES, "table shape {}x{}", table.rows.len(), table.columns.len());
    ensure!(table.cells.iter().flatten().all(|c| *c == Some(99.0)), "a cell differs from 99.0");
    let s = summarize(&table, false);
    ensure!(s.overall.mean == Some(99.0) && s.overall.stddev == Some(0.0), "overall {:?}", s.overall);
    out.pools.push(("synthetic".into(), fw, pool));

    let opts = SyntheticOptions { error_fraction: 0.05, ..Default::default() };
    let (subject, fw) = synthetic_recognizer(&opts);
    let pool = generate_kway(&fw, &KwayConfig::new(1), &GenLimits::default()).map_err(|e| e.to_string())?;
    let records = execute_pool(&subject, &pool, 4).map_err(|e| e.to_string())?;
    let table = build_metric_table(&pool, &records, Datum::as_number).map_err(|e| e.to_string())?;
    let s = summarize(&table, false);
    let (mean, sigma) = (2600.0 * 0.05, (2600.0f64 * 0.05 * 0.95).sqrt());
    let missing = s.overall.missing;
    ensure!((missing as f64 - mean).abs() <= 3.0 * sigma, "{missing} not recognised");

    let csv = String::from_utf8(emit_report(&table, &s, None, serde_json::Value::Null, ReportFormat::Csv).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let lines: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let header: Vec<&str> = ["ID"].into_iter().chain(ATTRIBUTES).chain(["Average", "StDev", "Not Recognised"]).collect();
    ensure!(lines[0] == header, "header {:?}", lines[0]);
    ensure!(lines.len() == 1 + 200 + 4, "{} csv lines", lines.len());
    ensure!(lines.iter().all(|l| l.len() == header.len()), "ragged csv rows");
    let labels: Vec<&str> = lines[201..].iter().map(|l| l[0]).collect();
    ensure!(labels == ["Average", "StDev", "Count", "Not Recognised"], "footer {labels:?}");
    ensure!(lines[204].last() == Some(&missing.to_string().as_str()), "not-recognised total {:?}", lines[204].last());
    within(start.elapsed(), Duration::from_secs(10))?;
    out.pools.push(("synthetic errors".into(), fw, pool));
    Ok(format!("cells 99.0, {missing} not recognised (expected {mean} ± {:.1})", 3.0 * sigma))
}

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh\n{body}").unwrap();
    drop(f);
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn c8_external(_: &mut Produced) -> Verdict {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let echo = script(dir.path(), "echo.sh", r#"exec sed -u 's/"input":/"output":/'"#);
    let subject = Subject::external("echo", ExternalSpec::new(vec![echo.display().to_string()]));
    let seeds: Vec<TestCase> = (0..100).map(|i| TestCase::seed(Datum::Number(i as f64))).collect();
    let pool = Pool::from_seeds(&seeds);
    let records = execute_pool(&subject, &pool, 4).map_err(|e| e.to_string())?;
    let outputs = records
        .iter()
        .zip(pool.iter())
        .filter(|(r, c)| r.outcome == Outcome::Output(c.datum.clone()))
        .count();
    ensure!(records.len() == 100 && outputs == 100, "{outputs}/100 echoed outputs");

    let bad = script(
        dir.path(),
        "bad.sh",
        r#"n=0
while IFS= read -r line; do
  n=$((n+1))
  if [ "$n" -eq 3 ]; then echo 'not json'; else printf '%s\n' "$line" | sed 's/"input":/"output":/'; fi
done"#,
    );
    let bin = env!("CARGO_BIN_EXE_morphtest");
    let gen = Command::new(bin)
        .current_dir(dir.path())
        .args(["generate", "--framework", "bits", "--strategy", "exhaustive", "--out", "pool.jsonl"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(gen.status.success(), "generate failed: {}", String::from_utf8_lossy(&gen.stderr));
    let run = Command::new(bin)
        .current_dir(dir.path())
        .args(["run", "--pool", "pool.jsonl", "--", bad.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&run.stderr);
    ensure!(run.status.code() == Some(5), "exit {:?}: {stderr}", run.status.code());
    ensure!(stderr.contains("line 3"), "diagnostic lacks the line number: {stderr}");
    Ok(format!("100 outputs; malformed subject exits 5: {}", stderr.trim()))
}

fn c9_replay(out: &mut Produced) -> Verdict {
    ensure!(!out.pools.is_empty(), "no pools recorded");
    let mut lineages = 0;
    for (label, fw, pool) in &out.pools {
        for (case, lineage) in pool.all_lineages() {
            let d = fw.replay(lineage, pool).map_err(|e| format!("{label}: {e}"))?;
            ensure!(d.case_id() == case.id, "{label}: lineage of {} replays to {}", case.id, d.case_id());
            lineages += 1;
        }
    }
    Ok(format!("{lineages} lineages across {} pools", out.pools.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("C1 pearson reproduction", c1_pearson),
        ("C2 sine oracle", c2_sine),
        ("C3 bisection", c3_bisection),
        ("C4 exhaustive closure", c4_exhaustive),
        ("C5 k-way coverage", c5_kway),
        ("C6 determinism", c6_determinism),
        ("C7 synthetic pipeline", c7_synthetic),
        ("C8 external protocol", c8_external),
        ("C9 lineage replay", c9_replay),
    ];
    let mut produced = Produced::default();
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| f(&mut produced)))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {name} ({ms} ms): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({ms} ms): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
