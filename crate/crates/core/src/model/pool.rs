use std::collections::HashMap;

use indexmap::IndexMap;

use super::case::{Lineage, TestCase};
use super::datum::CaseId;

/// Outcome of [`Pool::insert_or_alias`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    New,
    /// The datum already existed; the new lineage was recorded as an
    /// alternative derivation.
    Alias,
    /// Datum and lineage were both already known.
    Duplicate,
}

/// Deduplicated, insertion-ordered set of test cases.
///
/// Identity is the datum: the first lineage seen for a datum is kept as its
/// primary lineage. Strategies may additionally record alias lineages, other
/// derivations that produced the same datum. Aliases never displace the
/// primary lineage; they let coverage and metamorphism lookup see that a
/// composition was exercised even when its result collided with an earlier
/// case.
#[derive(Clone, Debug, Default)]
pub struct Pool {
    cases: IndexMap<CaseId, TestCase>,
    aliases: HashMap<CaseId, Vec<Lineage>>,
    pub truncated: bool,
}

impl Pool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_seeds<'a>(seeds: impl IntoIterator<Item = &'a TestCase>) -> Self {
        let mut pool = Self::new();
        for s in seeds {
            pool.insert(s.clone());
        }
        pool
    }

    /// Inserts iff the id is absent.
    pub fn insert(&mut self, case: TestCase) -> bool {
        if self.cases.contains_key(&case.id) {
            return false;
        }
        self.cases.insert(case.id, case);
        true
    }

    pub fn insert_or_alias(&mut self, case: TestCase) -> Insertion {
        match self.cases.get(&case.id) {
            None => {
                self.cases.insert(case.id, case);
                Insertion::New
            }
            Some(existing) if existing.lineage == case.lineage => Insertion::Duplicate,
            Some(_) => {
                let aliases = self.aliases.entry(case.id).or_default();
                if aliases.contains(&case.lineage) {
                    Insertion::Duplicate
                } else {
                    aliases.push(case.lineage);
                    Insertion::Alias
                }
            }
        }
    }

    /// Attaches an alias lineage to an existing case. Used when loading pool
    /// files.
    pub fn add_alias(&mut self, id: CaseId, lineage: Lineage) -> bool {
        match self.cases.get(&id) {
            Some(c) if c.lineage != lineage => {
                let aliases = self.aliases.entry(id).or_default();
                if aliases.contains(&lineage) {
                    false
                } else {
                    aliases.push(lineage);
                    true
                }
            }
            _ => false,
        }
    }

    pub fn get(&self, id: &CaseId) -> Option<&TestCase> {
        self.cases.get(id)
    }

    pub fn contains(&self, id: &CaseId) -> bool {
        self.cases.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TestCase> {
        self.cases.values()
    }

    pub fn get_index(&self, i: usize) -> Option<&TestCase> {
        self.cases.get_index(i).map(|(_, c)| c)
    }

    pub fn ids(&self) -> impl Iterator<Item = &CaseId> {
        self.cases.keys()
    }

    pub fn aliases(&self, id: &CaseId) -> &[Lineage] {
        self.aliases.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn alias_count(&self) -> usize {
        self.aliases.values().map(Vec::len).sum()
    }

    /// Primary lineage followed by any aliases.
    pub fn lineages<'a>(&'a self, case: &'a TestCase) -> impl Iterator<Item = &'a Lineage> {
        std::iter::once(&case.lineage).chain(self.aliases(&case.id))
    }

    /// Every (case, lineage) pair, primary lineages first within each case.
    pub fn all_lineages(&self) -> impl Iterator<Item = (&TestCase, &Lineage)> {
        self.cases
            .values()
            .flat_map(move |c| self.lineages(c).map(move |l| (c, l)))
    }

    pub fn seeds(&self) -> impl Iterator<Item = &TestCase> {
        self.cases.values().filter(|c| c.is_seed())
    }
}
