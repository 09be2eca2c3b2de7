use std::collections::BTreeSet;
use std::fmt;

use crate::metamodel::Metamodel;

/// A set of concept names drawn from one metamodel.
///
/// Stored sorted by name so sets hash and compare structurally; use
/// [`ConceptSet::in_order`] to list members in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptSet(BTreeSet<String>);

impl ConceptSet {
    pub fn new() -> Self {
        ConceptSet::default()
    }

    pub fn insert(&mut self, concept: impl Into<String>) -> bool {
        self.0.insert(concept.into())
    }

    pub fn remove(&mut self, concept: &str) -> bool {
        self.0.remove(concept)
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.0.contains(concept)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &ConceptSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &ConceptSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &ConceptSet) -> ConceptSet {
        ConceptSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &ConceptSet) -> ConceptSet {
        ConceptSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &ConceptSet) -> ConceptSet {
        ConceptSet(self.0.difference(&other.0).cloned().collect())
    }

    /// Members ordered by their position in `order`; names missing from
    /// `order` follow, alphabetically.
    pub fn in_order<S: AsRef<str>>(&self, order: &[S]) -> Vec<String> {
        let mut out: Vec<String> = order
            .iter()
            .map(AsRef::as_ref)
            .filter(|c| self.contains(c))
            .map(str::to_string)
            .collect();
        if out.len() < self.len() {
            for c in self.iter() {
                if !out.iter().any(|o| o == c) {
                    out.push(c.to_string());
                }
            }
        }
        out
    }

    /// Members in `mm` declaration order.
    pub fn in_metamodel_order(&self, mm: &Metamodel) -> Vec<String> {
        let order: Vec<&str> = mm.concepts().map(|c| c.name.as_str()).collect();
        self.in_order(&order)
    }
}

impl<S: Into<String>> FromIterator<S> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        ConceptSet(iter.into_iter().map(Into::into).collect())
    }
}

impl<S: Into<String>> Extend<S> for ConceptSet {
    fn extend<I: IntoIterator<Item = S>>(&mut self, iter: I) {
        self.0.extend(iter.into_iter().map(Into::into));
    }
}

impl fmt::Display for ConceptSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}
