//! Bundled subjects and frameworks.

mod classifier;
mod misc;
mod sine;
mod synthetic;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classifier::{classifier_framework, mid, threshold_classifier};
pub use misc::{bits_framework, doubling_framework, echo};
pub use sine::{linspace_0_pi, reflect, sine_correct, sine_faulty, sine_framework, sine_framework_with_seeds, SINE_TOLERANCE};
pub use synthetic::{
    identity, reference_attrs, similarity, synthetic_framework, synthetic_recognizer, synthetic_recognizer_subject,
    synthetic_seeds, SyntheticOptions, ATTRIBUTES,
};

use crate::model::{Datum, Framework, FrameworkError};
use crate::runner::Subject;

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("unknown subject {0:?}")]
    UnknownSubject(String),
    #[error("unknown framework {0:?}")]
    UnknownFramework(String),
    #[error("name {0:?} is already registered")]
    Duplicate(String),
    #[error("bad classifier threshold in {0:?}")]
    BadThreshold(String),
    #[error("framework {name:?}: {source}")]
    Framework { name: String, source: FrameworkError },
}

/// A bundled framework, optionally with replacement seeds and a new name.
/// This is what framework files and pool headers store.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameworkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub base: String,
    #[serde(default)]
    pub options: BuiltinOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<Datum>>,
}

impl FrameworkSpec {
    pub fn bundled(base: impl Into<String>, options: BuiltinOptions) -> Self {
        Self {
            name: None,
            base: base.into(),
            options,
            seeds: None,
        }
    }

    pub fn build(&self) -> Result<Framework, RegistryError> {
        let registry = Registry::builtin(&self.options);
        let mut fw = registry.framework(&self.base)?.clone();
        if let Some(seeds) = &self.seeds {
            fw = fw.with_seeds(seeds.clone()).map_err(|source| RegistryError::Framework {
                name: self.base.clone(),
                source,
            })?;
        }
        if let Some(name) = &self.name {
            fw.name = name.clone();
        }
        Ok(fw)
    }
}

/// Parameters of the bundled frameworks and subjects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuiltinOptions {
    pub sine_points: usize,
    pub classifier_seeds: Vec<f64>,
    pub doubling_seeds: Vec<f64>,
    pub bits_width: usize,
    pub synthetic: SyntheticOptions,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        Self {
            sine_points: 1000,
            classifier_seeds: vec![0.0, 1.0],
            doubling_seeds: vec![1.0],
            bits_width: 3,
            synthetic: SyntheticOptions::default(),
        }
    }
}

/// Name → subject and name → framework lookup.
///
/// `classifier:<t>` resolves to a threshold classifier for any finite `t`
/// without being registered.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    subjects: IndexMap<String, Subject>,
    frameworks: IndexMap<String, Framework>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin(opts: &BuiltinOptions) -> Self {
        let mut r = Self::new();
        let (synth, synth_fw) = synthetic_recognizer(&opts.synthetic);
        for s in [sine_correct(), sine_faulty(), synth, echo()] {
            r.register_subject(s).expect("builtin names are unique");
        }
        for fw in [
            sine_framework(opts.sine_points),
            classifier_framework(opts.classifier_seeds.clone()),
            synth_fw,
            doubling_framework(opts.doubling_seeds.clone()),
            bits_framework(opts.bits_width),
        ] {
            r.register_framework(fw).expect("builtin names are unique");
        }
        r
    }

    pub fn register_subject(&mut self, subject: Subject) -> Result<(), RegistryError> {
        if self.subjects.contains_key(&subject.name) || subject.name.starts_with("classifier:") {
            return Err(RegistryError::Duplicate(subject.name));
        }
        self.subjects.insert(subject.name.clone(), subject);
        Ok(())
    }

    pub fn register_framework(&mut self, fw: Framework) -> Result<(), RegistryError> {
        if self.frameworks.contains_key(&fw.name) {
            return Err(RegistryError::Duplicate(fw.name));
        }
        self.frameworks.insert(fw.name.clone(), fw);
        Ok(())
    }

    pub fn subject(&self, name: &str) -> Result<Subject, RegistryError> {
        if let Some(t) = name.strip_prefix("classifier:") {
            return match t.parse::<f64>() {
                Ok(t) if t.is_finite() => Ok(threshold_classifier(t)),
                _ => Err(RegistryError::BadThreshold(name.to_string())),
            };
        }
        self.subjects
            .get(name)
            .cloned()
            .ok_or_else(|| RegistryError::UnknownSubject(name.to_string()))
    }

    pub fn framework(&self, name: &str) -> Result<&Framework, RegistryError> {
        self.frameworks
            .get(name)
            .ok_or_else(|| RegistryError::UnknownFramework(name.to_string()))
    }

    pub fn subject_names(&self) -> impl Iterator<Item = &str> {
        self.subjects.keys().map(String::as_str)
    }

    pub fn framework_names(&self) -> impl Iterator<Item = &str> {
        self.frameworks.keys().map(String::as_str)
    }
}
