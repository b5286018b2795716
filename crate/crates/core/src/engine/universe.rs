use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Architecture, Term};

/// A subterm-closed set of ground terms. Derived equations never mention a
/// term outside of it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Universe {
    terms: BTreeSet<Term>,
}

impl Universe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut u = Universe::new();
        for t in terms {
            u.insert(t);
        }
        u
    }

    /// Terms of the architecture's facts and assumptions plus `extra`.
    pub fn of_architecture(arch: &Architecture, extra: &[Term]) -> Self {
        let mut u = Universe::from_terms(&arch.terms());
        for t in extra {
            u.insert(t);
        }
        u
    }

    /// Inserts `t` with all its subterms. Returns whether anything was new.
    pub fn insert(&mut self, t: &Term) -> bool {
        let before = self.terms.len();
        t.collect_subterms(&mut self.terms);
        self.terms.len() != before
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.terms.contains(t)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter()
    }
}
