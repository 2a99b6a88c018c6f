//! A predictable stand-in for a similarity-scoring recognizer.
//!
//! Each identity has a reference attribute vector derived from its id. The
//! recognizer scores an input by how far its attributes sit from the
//! reference: `100 · (1 − clamp(L1 / 13, 0, 1))`. Attribute datamorphisms
//! shift one coordinate by `delta`, so every single-step mutant scores
//! `100 · (1 − |delta| / 13)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{Datamorphism, Datum, DatumKind, Framework, Metamorphism, MorphParams, ParamSpec};
use crate::runner::Subject;

pub const ATTRIBUTES: [&str; 13] = [
    "Bald",
    "Bangs",
    "Black_Hair",
    "Blond_Hair",
    "Brown_Hair",
    "Bushy_Eyebrows",
    "Eyeglasses",
    "Male",
    "Mouth_Slightly_Open",
    "Mustache",
    "No_Beard",
    "Pale_Skin",
    "Young",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticOptions {
    /// Number of generated identities.
    pub seeds: usize,
    pub rng_seed: u64,
    /// Default shift applied by each attribute datamorphism.
    pub delta: f64,
    /// Share of perturbed inputs the recognizer refuses, picked by hash.
    pub error_fraction: f64,
    /// Scores are rounded to this many decimals; `None` keeps raw floats.
    pub decimals: Option<u32>,
    /// Minimum mutant score accepted by the similarity metamorphisms.
    pub threshold: f64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            seeds: 200,
            rng_seed: 0,
            delta: 0.13,
            error_fraction: 0.0,
            decimals: Some(6),
            threshold: 80.0,
        }
    }
}

/// Reference attributes for an identity, each in [0, 1).
pub fn reference_attrs(id: &str) -> Vec<f64> {
    let h = Sha256::digest(id.as_bytes());
    (0..ATTRIBUTES.len())
        .map(|i| u16::from_be_bytes([h[2 * i], h[2 * i + 1]]) as f64 / 65536.0)
        .collect()
}

pub fn identity(id: &str) -> Datum {
    Datum::record([("id", Datum::Text(id.to_string())), ("attrs", Datum::NumVector(reference_attrs(id)))])
}

fn split(d: &Datum) -> Option<(&str, &[f64])> {
    let Datum::Record(fields) = d else { return None };
    let id = fields.get("id")?.as_text()?;
    match fields.get("attrs")? {
        Datum::NumVector(v) if v.len() == ATTRIBUTES.len() => Some((id, v)),
        _ => None,
    }
}

pub fn synthetic_seeds(n: usize, rng_seed: u64) -> Vec<Datum> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n)
        .map(|i| identity(&format!("person-{:04}-{:08x}", i + 1, rng.gen::<u32>())))
        .collect()
}

fn attribute_morphism(i: usize, delta: f64) -> Datamorphism {
    Datamorphism::new(ATTRIBUTES[i], 1, move |args, params| {
        let mut d = args[0].clone();
        if let Datum::Record(fields) = &mut d {
            if let Some(Datum::NumVector(v)) = fields.get_mut("attrs") {
                v[i] += params.number("delta").unwrap_or(0.0);
            }
        }
        d
    })
    .with_params(vec![ParamSpec::number("delta", delta, None)])
    .with_condition(|args, _| split(&args[0]).is_some())
}

pub fn synthetic_framework(opts: &SyntheticOptions) -> Framework {
    let morphisms = (0..ATTRIBUTES.len()).map(|i| attribute_morphism(i, opts.delta)).collect();
    let threshold = opts.threshold;
    let metamorphisms = ATTRIBUTES
        .iter()
        .map(|name| {
            Metamorphism::new(format!("similar_{name}"), vec![(name.to_string(), MorphParams::new())], move |_, m, _| {
                m[0].as_number().is_some_and(|s| s >= threshold)
            })
        })
        .collect();
    let domain = DatumKind::Record {
        fields: Some(
            [
                ("id".to_string(), DatumKind::Text),
                ("attrs".to_string(), DatumKind::NumVector { len: Some(ATTRIBUTES.len()) }),
            ]
            .into(),
        ),
    };
    Framework::new(
        "synth_recognizer",
        domain,
        synthetic_seeds(opts.seeds, opts.rng_seed),
        morphisms,
        metamorphisms,
    )
    .expect("bundled synthetic framework is well formed")
}

pub fn similarity(attrs: &[f64], reference: &[f64]) -> f64 {
    let l1: f64 = attrs.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum();
    100.0 * (1.0 - (l1 / ATTRIBUTES.len() as f64).clamp(0.0, 1.0))
}

pub fn synthetic_recognizer_subject(opts: &SyntheticOptions) -> Subject {
    let (fraction, decimals) = (opts.error_fraction, opts.decimals);
    Subject::in_process("synth_recognizer", move |d| {
        let (id, attrs) = split(d).ok_or_else(|| "no face found".to_string())?;
        let reference = reference_attrs(id);
        if attrs != reference.as_slice() && d.case_id().unit_fraction() < fraction {
            return Err("not recognised".into());
        }
        let mut score = similarity(attrs, &reference);
        if let Some(k) = decimals {
            let scale = 10f64.powi(k as i32);
            score = (score * scale).round() / scale;
        }
        Ok(Datum::Number(score))
    })
}

pub fn synthetic_recognizer(opts: &SyntheticOptions) -> (Subject, Framework) {
    (synthetic_recognizer_subject(opts), synthetic_framework(opts))
}
