//! Domain model: datums, datamorphisms, metamorphisms, lineages and pools.

mod case;
mod datum;
mod framework;
mod morphism;
mod pool;

pub use case::{Lineage, Step, TestCase};
pub use datum::{canonical_hash, CaseId, Datum, DatumKind, DatumTag, DecodeError};
pub use framework::{Framework, FrameworkError, Metamorphism, Relation, ReplayError, DEFAULT_TOLERANCE};
pub use morphism::{Datamorphism, MorphError, MorphParams, ParamSpec};
pub use pool::{Insertion, Pool};
