use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{load_config, ExploreSection, FrameworkSource, RunConfig, StrategyConfig, SubjectConfig, CONFIG_VERSION};
use super::{
    CheckArgs, Cli, CliError, Command, CoverageArgs, ExploreArgs, Format, GenerateArgs, RunArgs, ServeArgs, StatsArgs,
    SubjectArgs,
};
use crate::analytics::{build_metric_table, emit_report, summarize, CorrelationReport, ReportFormat};
use crate::io::{read_pool, read_records, write_pool, write_records, write_verdicts, PoolHeader};
use crate::model::{Datum, Framework, Pool};
use crate::runner::{check_metamorphisms, execute_pool, CheckReport, ExternalSpec, Outcome, Subject};
use crate::strategies::{
    explore_boundary, generate_exhaustive, generate_kway, generate_optimal, generate_random, measure_kway_coverage,
    ExploreConfig, GaConfig, KwayConfig,
};
use crate::subjects::{mid, BuiltinOptions, Registry};

struct Ctx {
    cfg: RunConfig,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    strict: bool,
    workers: Option<usize>,
}

impl Ctx {
    fn workers(&self) -> usize {
        self.workers.or(self.cfg.workers).unwrap_or(1).max(1)
    }

    fn rng_seed(&self) -> u64 {
        self.seed.or(self.cfg.rng_seed).unwrap_or(0)
    }

    fn options(&self) -> Result<BuiltinOptions, CliError> {
        Ok(match &self.cfg.framework {
            Some(src) => src.resolve()?.options,
            None => BuiltinOptions::default(),
        })
    }
}

/// Where a command's main artifact goes, and where its human-readable
/// summary goes (standard error when the artifact takes standard output).
struct Sink(Option<PathBuf>);

impl Sink {
    fn write(&self, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
        match &self.0 {
            Some(path) => {
                let file = File::create(path).map_err(|e| io_err(path, e))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush().map_err(|e| io_err(path, e))
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
                lock.flush().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.0.is_some() {
            println!("{}", msg.as_ref());
        } else {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

pub(super) fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig {
            version: CONFIG_VERSION,
            ..Default::default()
        },
    };
    let ctx = Ctx {
        cfg,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        strict: cli.strict,
        workers: cli.workers,
    };
    match cli.command {
        Command::Generate(a) => generate(&ctx, a),
        Command::Run(a) => run(&ctx, a),
        Command::Check(a) => check(&ctx, a),
        Command::Coverage(a) => coverage(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Explore(a) => explore(&ctx, a),
        Command::Subjects => list_subjects(&ctx),
        Command::Serve(a) => serve(&ctx, a),
    }
}

fn resolve_subject(args: &SubjectArgs, fallback: Option<&SubjectConfig>, options: &BuiltinOptions) -> Result<Subject, CliError> {
    let with_overrides = |mut spec: ExternalSpec| {
        if let Some(t) = args.timeout_ms {
            spec.timeout_ms = t;
        }
        if let Some(r) = args.max_restarts {
            spec.max_restarts = r;
        }
        spec
    };
    if !args.external.is_empty() {
        let spec = with_overrides(ExternalSpec::new(args.external.clone()));
        return Ok(Subject::external(args.external.join(" "), spec));
    }
    let registry = Registry::builtin(options);
    if let Some(name) = &args.subject {
        return Ok(registry.subject(name)?);
    }
    match fallback {
        Some(SubjectConfig::Named { name }) => Ok(registry.subject(name)?),
        Some(SubjectConfig::External { external }) => {
            if external.command.is_empty() {
                return Err(CliError::Config("external subject command is empty".into()));
            }
            Ok(Subject::external(external.command.join(" "), with_overrides(external.clone())))
        }
        None => Err(CliError::Config(
            "no subject given (use --subject NAME, `-- COMMAND...`, or a subject section in the config)".into(),
        )),
    }
}

fn load_pool(path: &Path) -> Result<(PoolHeader, Pool, Framework), CliError> {
    let (header, pool) = read_pool(open(path)?)?;
    let fw = header.framework.build()?;
    Ok((header, pool, fw))
}

fn strategy(ctx: &Ctx, a: &GenerateArgs) -> Result<StrategyConfig, CliError> {
    let mut s = match (&a.strategy, &ctx.cfg.strategy) {
        (Some(name), Some(s)) if s.name() == name => s.clone(),
        (Some(name), _) => StrategyConfig::named(name)?,
        (None, Some(s)) => s.clone(),
        (None, None) => {
            return Err(CliError::Config(format!(
                "no strategy given; valid strategies: {}",
                StrategyConfig::NAMES.join(", ")
            )))
        }
    };
    match &mut s {
        StrategyConfig::Exhaustive => {}
        StrategyConfig::Random { count } => *count = a.count.unwrap_or(*count),
        StrategyConfig::Kway { k, distinct_only } => {
            *k = a.k.unwrap_or(*k);
            *distinct_only |= a.distinct_only;
        }
        StrategyConfig::Optimal {
            population_cap,
            generations,
            fitness,
            ..
        } => {
            *population_cap = a.population.unwrap_or(*population_cap);
            *generations = a.generations.unwrap_or(*generations);
            if let Some(f) = &a.fitness {
                fitness.clone_from(f);
            }
        }
    }
    Ok(s)
}

fn generate(ctx: &Ctx, a: GenerateArgs) -> Result<(), CliError> {
    let source = match &a.framework {
        Some(name) => FrameworkSource::Named(name.clone()),
        None => ctx
            .cfg
            .framework
            .clone()
            .ok_or_else(|| CliError::Config("no framework given (use --framework NAME|FILE)".into()))?,
    };
    let spec = source.resolve()?;
    let fw = spec.build()?;
    let mut limits = ctx.cfg.limits.clone();
    if let Some(n) = a.max_pool_size {
        limits.max_pool_size = n;
    }
    if let Some(n) = a.max_depth {
        limits.max_depth = n;
    }
    let strategy = strategy(ctx, &a)?;
    let seed = ctx.rng_seed();
    let sink = Sink(ctx.out.clone().or_else(|| ctx.cfg.outputs.pool.clone()));

    let mut notes = Vec::new();
    let pool = match &strategy {
        StrategyConfig::Exhaustive => generate_exhaustive(&fw, &limits),
        StrategyConfig::Random { count } => generate_random(&fw, *count, seed, &limits),
        StrategyConfig::Kway { k, distinct_only } => generate_kway(
            &fw,
            &KwayConfig {
                k: *k,
                distinct_only: *distinct_only,
            },
            &limits,
        )?,
        StrategyConfig::Optimal {
            population_cap,
            generations,
            tournament_size,
            elitism_count,
            fitness,
        } => {
            let ga = GaConfig {
                population_cap: *population_cap,
                generations: *generations,
                tournament_size: *tournament_size,
                elitism_count: *elitism_count,
                rng_seed: seed,
                fitness: fitness.clone(),
            };
            let subject = if fitness == "violations" {
                let args = SubjectArgs {
                    subject: a.subject.clone(),
                    external: Vec::new(),
                    timeout_ms: None,
                    max_restarts: None,
                };
                Some(resolve_subject(&args, ctx.cfg.subject.as_ref(), &spec.options)?)
            } else {
                None
            };
            let r = generate_optimal(&fw, &ga, subject.as_ref())?;
            if let Some(best) = r.trace.last() {
                notes.push(format!("best fitness: {best} after {} generation(s)", generations));
            }
            r.pool
        }
    };

    let echo = serde_json::json!({
        "strategy": strategy,
        "limits": limits,
        "rng_seed": seed,
    });
    let header = PoolHeader::new(spec, echo, &pool);
    sink.write(|w| Ok(write_pool(w, &header, &pool)?))?;

    sink.note(format!("pool: {} cases (truncated: {})", pool.len(), pool.truncated));
    if let Some(kcfg) = strategy.kway() {
        let cov = measure_kway_coverage(&pool, &fw, &kcfg);
        sink.note(coverage_line(&cov.per_n, cov.aggregate));
    }
    for n in notes {
        sink.note(n);
    }
    Ok(())
}

fn coverage_line(per_n: &[f64], aggregate: f64) -> String {
    let parts: Vec<String> = per_n.iter().enumerate().map(|(n, c)| format!("n={n}: {c:.6}")).collect();
    format!("k-way coverage: {} aggregate: {aggregate:.6}", parts.join(", "))
}

fn run(ctx: &Ctx, a: RunArgs) -> Result<(), CliError> {
    let (header, pool, _) = load_pool(&a.pool)?;
    let subject = resolve_subject(&a.subject, ctx.cfg.subject.as_ref(), &header.framework.options)?;
    let records = execute_pool(&subject, &pool, ctx.workers())?;
    let sink = Sink(ctx.out.clone().or_else(|| ctx.cfg.outputs.records.clone()));
    sink.write(|w| Ok(write_records(w, &subject.name, &records)?))?;

    let (mut out, mut err, mut timeout) = (0, 0, 0);
    for r in &records {
        match r.outcome {
            Outcome::Output(_) => out += 1,
            Outcome::SubjectError(_) => err += 1,
            Outcome::Timeout => timeout += 1,
        }
    }
    sink.note(format!(
        "records: {} (output {out}, subject_error {err}, timeout {timeout})",
        records.len()
    ));
    Ok(())
}

type Checked = (PoolHeader, Pool, Framework, String, Vec<crate::runner::ExecutionRecord>, CheckReport);

fn checked(pool_path: &Path, records_path: &Path) -> Result<Checked, CliError> {
    let (header, pool, fw) = load_pool(pool_path)?;
    let (rh, records) = read_records(open(records_path)?)?;
    let report = check_metamorphisms(&fw, &pool, &records);
    Ok((header, pool, fw, rh.subject, records, report))
}

fn check(ctx: &Ctx, a: CheckArgs) -> Result<(), CliError> {
    let (_, _, _, _, _, report) = checked(&a.pool, &a.records)?;
    if let Some(path) = ctx.out.clone().or_else(|| ctx.cfg.outputs.verdicts.clone()) {
        Sink(Some(path)).write(|w| Ok(write_verdicts(w, &report)?))?;
    }
    for (name, c) in &report.summary {
        println!(
            "{name}: pass {} fail {} inapplicable {} error {}",
            c.pass, c.fail, c.inapplicable, c.error
        );
    }
    let t = report.totals();
    println!("Pass: {}", t.pass);
    println!("Fail: {}", t.fail);
    println!("Inapplicable: {}", t.inapplicable);
    println!("Error: {}", t.error);
    if ctx.strict && t.fail > 0 {
        return Err(CliError::FailedVerdicts(t.fail));
    }
    Ok(())
}

fn coverage(ctx: &Ctx, a: CoverageArgs) -> Result<(), CliError> {
    let (_, pool, fw) = load_pool(&a.pool)?;
    let cov = measure_kway_coverage(
        &pool,
        &fw,
        &KwayConfig {
            k: a.k,
            distinct_only: a.distinct_only,
        },
    );
    if let Some(path) = &ctx.out {
        let json = serde_json::to_vec_pretty(&cov).map_err(|e| CliError::Io(e.to_string()))?;
        Sink(Some(path.clone())).write(|w| w.write_all(&json).map_err(|e| io_err(path, e)))?;
    }
    for (n, c) in cov.per_n.iter().enumerate() {
        println!("n={n}: {c:.6}");
    }
    println!("aggregate: {:.6}", cov.aggregate);
    Ok(())
}

/// Every field of the CSV that parses as a number, in file order.
fn numbers_in_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(open(path)?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        out.extend(rec.iter().filter_map(|f| f.trim().parse::<f64>().ok()));
    }
    Ok(out)
}

fn stats(ctx: &Ctx, a: StatsArgs) -> Result<(), CliError> {
    if a.pearson.is_none() && a.pool.is_none() {
        return Err(CliError::Config("stats needs --pool and --records, or --pearson X Y".into()));
    }
    if let (Some(pool_path), Some(records_path)) = (&a.pool, &a.records) {
        let (header, pool, fw, subject, records, report) = checked(pool_path, records_path)?;
        let table = build_metric_table(&pool, &records, Datum::as_number)?;
        let summary = summarize(&table, a.population_stddev);
        let format = match ctx.format.unwrap_or(Format::Csv) {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        };
        let meta = serde_json::json!({
            "framework": fw.name,
            "subject": subject,
            "pool_size": pool.len(),
            "truncated": header.truncated,
            "population_stddev": a.population_stddev,
        });
        let bytes = emit_report(&table, &summary, Some(&report.summary), meta, format)?;
        let sink = Sink(ctx.out.clone().or_else(|| ctx.cfg.outputs.report.clone()));
        sink.write(|w| w.write_all(&bytes).map_err(|e| CliError::Io(e.to_string())))?;
        let fmt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.4}"));
        sink.note(format!(
            "table: {} rows x {} columns, overall mean {}, stddev {}, not recognised {}",
            table.rows.len(),
            table.columns.len(),
            fmt(summary.overall.mean),
            fmt(summary.overall.stddev),
            summary.overall.missing
        ));
    }
    if let Some(files) = &a.pearson {
        let (x, y) = (numbers_in_csv(&files[0])?, numbers_in_csv(&files[1])?);
        let label = |p: &PathBuf| p.display().to_string();
        let r = CorrelationReport::compute((label(&files[0]), label(&files[1])), &x, &y)
            .map_err(|e| CliError::Config(e.to_string()))?;
        println!("pearson r = {:.2} ({}, n = {})", r.r, r.r, r.n);
    }
    Ok(())
}

fn explore(ctx: &Ctx, a: ExploreArgs) -> Result<(), CliError> {
    let subject = resolve_subject(&a.subject, ctx.cfg.subject.as_ref(), &ctx.options()?)?;
    let section = ctx.cfg.explore.clone();
    let pick = |flag: Option<f64>, from_cfg: Option<Datum>, what: &str| match (flag, from_cfg) {
        (Some(x), _) => Ok(Datum::Number(x)),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::Config(format!("explore needs --{what}"))),
    };
    let lo = pick(a.a, section.as_ref().map(|s| s.a.clone()), "a")?;
    let hi = pick(a.b, section.as_ref().map(|s| s.b.clone()), "b")?;
    let epsilon = a
        .epsilon
        .or(section.as_ref().map(|s| s.epsilon))
        .ok_or_else(|| CliError::Config("explore needs --epsilon".into()))?;
    let mut cfg = ExploreConfig::new(epsilon);
    if let Some(ExploreSection { max_iterations, distance, .. }) = &section {
        cfg.distance = *distance;
        if let Some(n) = max_iterations {
            cfg.max_iterations = *n;
        }
    }
    if let Some(n) = a.max_iterations {
        cfg.max_iterations = n;
    }
    let result = explore_boundary(&subject, &lo, &hi, &mid(), &cfg)?;
    let sink = Sink(ctx.out.clone());
    let json = serde_json::to_vec_pretty(&result).map_err(|e| CliError::Io(e.to_string()))?;
    sink.write(|w| {
        w.write_all(&json)
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| CliError::Io(e.to_string()))
    })?;
    sink.note(format!(
        "boundary between {} ({}) and {} ({}) after {} iteration(s)",
        result.lo.datum, result.lo_class, result.hi.datum, result.hi_class, result.iterations
    ));
    Ok(())
}

fn list_subjects(ctx: &Ctx) -> Result<(), CliError> {
    let registry = Registry::builtin(&ctx.options()?);
    println!("subjects:");
    for name in registry.subject_names() {
        println!("  {name}");
    }
    println!("  classifier:<t>");
    println!("frameworks:");
    for name in registry.framework_names() {
        let fw = registry.framework(name)?;
        println!(
            "  {name} ({} seeds, {} datamorphisms, {} metamorphisms)",
            fw.seeds().len(),
            fw.morphisms().len(),
            fw.metamorphisms().len()
        );
    }
    Ok(())
}

fn serve(ctx: &Ctx, a: ServeArgs) -> Result<(), CliError> {
    let subject = Registry::builtin(&ctx.options()?).subject(&a.subject)?;
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    crate::runner::protocol::serve(stdin.lock(), stdout.lock(), |d| match subject.invoke(d) {
        Ok(Outcome::Output(out)) => Ok(out),
        Ok(Outcome::SubjectError(e)) => Err(e),
        Ok(Outcome::Timeout) => Err("timeout".into()),
        Err(e) => Err(e.to_string()),
    })
    .map(|_| ())
    .map_err(CliError::Protocol)
}
