use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::Datum;
use crate::runner::ExternalSpec;
use crate::strategies::{Distance, GenLimits, KwayConfig};
use crate::subjects::{BuiltinOptions, FrameworkSpec};

pub const CONFIG_VERSION: u32 = 1;

/// The run-configuration document passed with `--config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub framework: Option<FrameworkSource>,
    #[serde(default)]
    pub strategy: Option<StrategyConfig>,
    #[serde(default)]
    pub limits: GenLimits,
    #[serde(default)]
    pub subject: Option<SubjectConfig>,
    #[serde(default)]
    pub explore: Option<ExploreSection>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub rng_seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// A bundled framework name, a path to a framework file, or an inline
/// framework spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameworkSource {
    Named(String),
    Inline(FrameworkSpec),
}

/// Framework file: a [`FrameworkSpec`] with a format version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameworkFile {
    version: u32,
    #[serde(default)]
    name: Option<String>,
    base: String,
    #[serde(default)]
    options: BuiltinOptions,
    #[serde(default)]
    seeds: Option<Vec<Datum>>,
}

impl FrameworkSource {
    pub fn resolve(&self) -> Result<FrameworkSpec, CliError> {
        match self {
            FrameworkSource::Inline(spec) => Ok(spec.clone()),
            FrameworkSource::Named(name) if Path::new(name).is_file() => {
                let f: FrameworkFile = read_json(Path::new(name))?;
                if f.version != CONFIG_VERSION {
                    return Err(CliError::Config(format!("{name}: unsupported framework file version {}", f.version)));
                }
                Ok(FrameworkSpec {
                    name: f.name,
                    base: f.base,
                    options: f.options,
                    seeds: f.seeds,
                })
            }
            FrameworkSource::Named(name) => Ok(FrameworkSpec::bundled(name.clone(), BuiltinOptions::default())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Exhaustive,
    Random {
        #[serde(default = "default_count")]
        count: usize,
    },
    Kway {
        k: usize,
        #[serde(default)]
        distinct_only: bool,
    },
    Optimal {
        #[serde(default = "default_population")]
        population_cap: usize,
        #[serde(default = "default_generations")]
        generations: usize,
        #[serde(default = "default_tournament")]
        tournament_size: usize,
        #[serde(default = "default_elitism")]
        elitism_count: usize,
        #[serde(default = "default_fitness")]
        fitness: String,
    },
}

fn default_count() -> usize {
    100
}
fn default_population() -> usize {
    20
}
fn default_generations() -> usize {
    10
}
fn default_tournament() -> usize {
    2
}
fn default_elitism() -> usize {
    1
}
fn default_fitness() -> String {
    "max_numeric".into()
}

impl StrategyConfig {
    pub const NAMES: [&'static str; 4] = ["exhaustive", "random", "kway", "optimal"];

    pub fn named(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "exhaustive" => Self::Exhaustive,
            "random" => Self::Random { count: default_count() },
            "kway" => Self::Kway {
                k: 2,
                distinct_only: false,
            },
            "optimal" => Self::Optimal {
                population_cap: default_population(),
                generations: default_generations(),
                tournament_size: default_tournament(),
                elitism_count: default_elitism(),
                fitness: default_fitness(),
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown strategy {other:?}; valid strategies: {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Random { .. } => "random",
            Self::Kway { .. } => "kway",
            Self::Optimal { .. } => "optimal",
        }
    }

    pub fn kway(&self) -> Option<KwayConfig> {
        match self {
            Self::Kway { k, distinct_only } => Some(KwayConfig {
                k: *k,
                distinct_only: *distinct_only,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubjectConfig {
    External { external: ExternalSpec },
    Named { name: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreSection {
    pub a: Datum,
    pub b: Datum,
    pub epsilon: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub distance: Distance,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub pool: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub verdicts: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = read_json(path)?;
    if cfg.version != CONFIG_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported config version {} (expected {CONFIG_VERSION})",
            path.display(),
            cfg.version
        )));
    }
    Ok(cfg)
}
