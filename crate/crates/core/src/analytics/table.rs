use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::stats::{describe, Summary};
use super::AnalyticsError;
use crate::model::{CaseId, Datum, Pool};
use crate::runner::{ExecutionRecord, Outcome};

/// Seeds × datamorphisms table of scores. `None` marks a missing score
/// (subject error, timeout, unscorable output or no mutant).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl MetricTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.cells.iter().map(move |r| r[j])
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<Option<f64>> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.columns.iter().position(|c| c == column)?;
        Some(self.cells[i][j])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub columns: Vec<Summary>,
    pub rows: Vec<Summary>,
    pub overall: Summary,
    #[serde(default)]
    pub population_stddev: bool,
}

/// Tabulates the scores of single-step mutants: cell (s, φ) holds
/// `extract(P(φ(s)))`.
///
/// Rows are the pool's seeds, columns the datamorphisms in order of first
/// appearance. Alias lineages count, so a mutant that coincides with another
/// case still fills its cell.
pub fn build_metric_table<F>(pool: &Pool, records: &[ExecutionRecord], extract: F) -> Result<MetricTable, AnalyticsError>
where
    F: Fn(&Datum) -> Option<f64>,
{
    let outcomes: HashMap<CaseId, &Outcome> = records.iter().map(|r| (r.case_id, &r.outcome)).collect();
    let seeds: IndexMap<CaseId, usize> = pool.seeds().enumerate().map(|(i, s)| (s.id, i)).collect();
    let mut columns: IndexMap<String, usize> = IndexMap::new();
    let mut filled: HashMap<(usize, usize), Option<f64>> = HashMap::new();

    for (case, lineage) in pool.all_lineages() {
        match lineage.depth() {
            0 => continue,
            1 => {}
            d => {
                return Err(AnalyticsError::Shape(format!(
                    "case {} has a lineage of depth {d}; tables need single-step mutants",
                    case.id
                )))
            }
        }
        let Some(&row) = seeds.get(&lineage.seed_id) else {
            return Err(AnalyticsError::Shape(format!("seed {} of case {} is not in the pool", lineage.seed_id, case.id)));
        };
        let name = &lineage.steps[0].morphism;
        let next = columns.len();
        let col = *columns.entry(name.clone()).or_insert(next);
        let score = match outcomes.get(&case.id) {
            Some(Outcome::Output(d)) => extract(d),
            _ => None,
        };
        if filled.insert((row, col), score).is_some() {
            return Err(AnalyticsError::Shape(format!(
                "seed {} has more than one {name} mutant (parameter grids do not fit a table)",
                lineage.seed_id
            )));
        }
    }

    let cells = (0..seeds.len())
        .map(|i| (0..columns.len()).map(|j| filled.get(&(i, j)).copied().flatten()).collect())
        .collect();
    Ok(MetricTable {
        rows: seeds.keys().map(|id| id.to_hex()).collect(),
        columns: columns.into_keys().collect(),
        cells,
    })
}

/// Per-column, per-row and overall statistics.
pub fn summarize(table: &MetricTable, population_stddev: bool) -> TableSummary {
    TableSummary {
        columns: (0..table.columns.len()).map(|j| describe(table.column(j), population_stddev)).collect(),
        rows: table.cells.iter().map(|r| describe(r.iter().copied(), population_stddev)).collect(),
        overall: describe(table.cells.iter().flatten().copied(), population_stddev),
        population_stddev,
    }
}
