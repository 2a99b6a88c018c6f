//! Datamorphic test generation and checking.
//!
//! A [`Framework`] bundles seed test cases, datamorphisms (input
//! transformations) and metamorphisms (correctness relations defined over
//! those transformations). Strategies grow a [`Pool`] of test cases from the
//! seeds, the runner executes a subject over the pool and checks the
//! metamorphisms, and the analytics module turns subject scores into
//! per-datamorphism tables.

pub mod analytics;
pub mod cli;
pub mod io;
pub mod model;
pub mod runner;
pub mod strategies;
pub mod subjects;

pub use model::{CaseId, Datamorphism, Datum, DatumKind, Framework, Lineage, Metamorphism, MorphParams, Pool, Step, TestCase};
