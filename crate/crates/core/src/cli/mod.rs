//! The `morphtest` command line.
//!
//! Stages are file-mediated: `generate` writes a pool, `run` executes a
//! subject over it, `check` evaluates metamorphisms and `stats` builds score
//! tables. `--config` supplies a JSON run configuration; flags override it.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{load_config, RunConfig, StrategyConfig, SubjectConfig, CONFIG_VERSION};

use crate::analytics::AnalyticsError;
use crate::io::FileError;
use crate::runner::RunnerError;
use crate::strategies::StrategyError;
use crate::subjects::RegistryError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_VERDICTS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_SUBJECT: i32 = 4;
pub const EXIT_PROTOCOL: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Limit(String),
    #[error("{0}")]
    Subject(String),
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} failing verdict(s)")]
    FailedVerdicts(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::FailedVerdicts(_) => EXIT_FAILED_VERDICTS,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Limit(_) => EXIT_LIMIT,
            CliError::Subject(_) => EXIT_SUBJECT,
            CliError::Protocol(_) => EXIT_PROTOCOL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        match e {
            RunnerError::SubjectUnavailable { .. } => CliError::Subject(e.to_string()),
            RunnerError::Protocol { .. } => CliError::Protocol(e.to_string()),
        }
    }
}

impl From<StrategyError> for CliError {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::LimitExceeded(_) => CliError::Limit(e.to_string()),
            StrategyError::Runner(r) => r.into(),
            StrategyError::SubjectFailed { .. } => CliError::Subject(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "morphtest", version, about = "Datamorphic test generation, execution and analysis")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the random and genetic strategies.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file for the command's main artifact (standard output if unset).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format for `stats`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 1 if any verdict is Fail.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Concurrent subject invocations.
    #[arg(long, global = true, env = "MORPHTEST_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a test pool from a framework's seeds.
    Generate(GenerateArgs),
    /// Execute a subject on every case of a pool.
    Run(RunArgs),
    /// Evaluate metamorphisms over an executed pool.
    Check(CheckArgs),
    /// Measure k-way combinatorial coverage of a pool.
    Coverage(CoverageArgs),
    /// Score tables, summaries and correlations.
    Stats(StatsArgs),
    /// Locate a classification boundary by midpoint probing.
    Explore(ExploreArgs),
    /// List bundled subjects and frameworks.
    Subjects,
    /// Serve a bundled subject over the line protocol on stdin/stdout.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Bundled framework name or framework file.
    #[arg(long)]
    pub framework: Option<String>,
    /// exhaustive, random, kway or optimal.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Tuple length for the kway strategy.
    #[arg(long)]
    pub k: Option<usize>,
    /// Skip k-way tuples that repeat a datamorphism.
    #[arg(long)]
    pub distinct_only: bool,
    /// New cases for the random strategy.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub max_pool_size: Option<usize>,
    /// Maximum lineage steps per case.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Population cap for the optimal strategy.
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// max_numeric, diversity or violations.
    #[arg(long)]
    pub fitness: Option<String>,
    /// Subject for the "violations" fitness.
    #[arg(long)]
    pub subject: Option<String>,
}

#[derive(Debug, Args)]
pub struct SubjectArgs {
    /// Bundled subject name.
    #[arg(long, conflicts_with = "external")]
    pub subject: Option<String>,
    /// External subject command and arguments, after `--`.
    #[arg(last = true)]
    pub external: Vec<String>,
    /// Per-case timeout for external subjects.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Restarts allowed after an external subject crashes.
    #[arg(long)]
    pub max_restarts: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub pool: PathBuf,
    #[command(flatten)]
    pub subject: SubjectArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub records: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Skip tuples that repeat a datamorphism.
    #[arg(long)]
    pub distinct_only: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, requires = "records")]
    pub pool: Option<PathBuf>,
    #[arg(long, requires = "pool")]
    pub records: Option<PathBuf>,
    /// Divide by n instead of n − 1.
    #[arg(long)]
    pub population_stddev: bool,
    /// Correlate the numbers in two CSV files.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    pub pearson: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub subject: SubjectArgs,
    /// Starting point in one class.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Starting point in the other class.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Stop once the endpoints are this close.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub subject: String,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("morphtest: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    main_with_args(std::env::args_os())
}
