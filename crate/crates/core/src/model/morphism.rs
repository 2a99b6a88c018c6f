//! Datamorphisms: named, parameterized transformations of test data.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::datum::{Datum, DatumTag};

/// Parameter values for one application, keyed by parameter name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MorphParams(pub BTreeMap<String, Datum>);

impl MorphParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Datum) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Datum> {
        self.0.get(name)
    }

    /// Numeric parameter lookup; `None` when absent or not a number.
    pub fn number(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Datum::as_number)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub tag: DatumTag,
    /// Inclusive numeric bounds, checked for `Number` parameters.
    pub range: Option<(f64, f64)>,
    pub default: Datum,
}

impl ParamSpec {
    pub fn number(name: impl Into<String>, default: f64, range: Option<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            tag: DatumTag::Number,
            range,
            default: Datum::Number(default),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorphError {
    #[error("datamorphism {name} is not applicable to the given arguments")]
    Inapplicable { name: String },
    #[error("datamorphism {name}: {reason}")]
    SchemaViolation { name: String, reason: String },
    #[error("datamorphism {name} expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
}

pub type Applicability = dyn Fn(&[Datum], &MorphParams) -> bool + Send + Sync;
pub type Transform = dyn Fn(&[Datum], &MorphParams) -> Datum + Send + Sync;

/// A k-ary datamorphism guarded by an applicability condition.
///
/// `transform` is only ever called through [`Datamorphism::apply`], after the
/// parameters have been validated and the condition has returned true.
#[derive(Clone)]
pub struct Datamorphism {
    name: String,
    arity: usize,
    params: Vec<ParamSpec>,
    applicable: Arc<Applicability>,
    transform: Arc<Transform>,
}

impl fmt::Debug for Datamorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Datamorphism")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Datamorphism {
    /// A morphism that is applicable everywhere.
    pub fn new<F>(name: impl Into<String>, arity: usize, transform: F) -> Self
    where
        F: Fn(&[Datum], &MorphParams) -> Datum + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            arity,
            params: Vec::new(),
            applicable: Arc::new(|_, _| true),
            transform: Arc::new(transform),
        }
    }

    /// Unary morphism ignoring parameters.
    pub fn unary<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Datum) -> Datum + Send + Sync + 'static,
    {
        Self::new(name, 1, move |args, _| f(&args[0]))
    }

    pub fn with_params(mut self, params: Vec<ParamSpec>) -> Self {
        self.params = params;
        self
    }

    pub fn with_condition<V>(mut self, condition: V) -> Self
    where
        V: Fn(&[Datum], &MorphParams) -> bool + Send + Sync + 'static,
    {
        self.applicable = Arc::new(condition);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn param_schema(&self) -> &[ParamSpec] {
        &self.params
    }

    /// Parameter set made of every schema default.
    pub fn default_params(&self) -> MorphParams {
        MorphParams(
            self.params
                .iter()
                .map(|p| (p.name.clone(), p.default.clone()))
                .collect(),
        )
    }

    /// Checks `params` against the schema and fills in defaults for omitted
    /// names.
    pub fn resolve_params(&self, params: &MorphParams) -> Result<MorphParams, MorphError> {
        let violation = |reason: String| MorphError::SchemaViolation {
            name: self.name.clone(),
            reason,
        };
        for key in params.0.keys() {
            if !self.params.iter().any(|p| &p.name == key) {
                return Err(violation(format!("unknown parameter {key:?}")));
            }
        }
        let mut out = BTreeMap::new();
        for spec in &self.params {
            let value = params.get(&spec.name).unwrap_or(&spec.default);
            if value.tag() != spec.tag {
                return Err(violation(format!(
                    "parameter {:?} must be {}, got {}",
                    spec.name,
                    spec.tag,
                    value.tag()
                )));
            }
            if let (Some((lo, hi)), Datum::Number(x)) = (spec.range, value) {
                if !(lo..=hi).contains(x) {
                    return Err(violation(format!(
                        "parameter {:?} = {x} outside [{lo}, {hi}]",
                        spec.name
                    )));
                }
            }
            out.insert(spec.name.clone(), value.clone());
        }
        Ok(MorphParams(out))
    }

    /// Whether the applicability condition holds. Malformed calls count as
    /// inapplicable.
    pub fn is_applicable(&self, args: &[Datum], params: &MorphParams) -> bool {
        args.len() == self.arity
            && self
                .resolve_params(params)
                .is_ok_and(|p| (self.applicable)(args, &p))
    }

    pub fn apply(&self, args: &[Datum], params: &MorphParams) -> Result<Datum, MorphError> {
        if args.len() != self.arity {
            return Err(MorphError::ArityMismatch {
                name: self.name.clone(),
                expected: self.arity,
                got: args.len(),
            });
        }
        let params = self.resolve_params(params)?;
        if !(self.applicable)(args, &params) {
            return Err(MorphError::Inapplicable {
                name: self.name.clone(),
            });
        }
        Ok((self.transform)(args, &params))
    }
}
