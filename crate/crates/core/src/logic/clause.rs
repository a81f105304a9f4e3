// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{LogicError, Var};

/// Consequent of a Horn rule: a variable or falsity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Head {
    Atom(Var),
    Bottom,
}

impl Head {
    pub fn atom(self) -> Option<Var> {
        match self {
            Head::Atom(v) => Some(v),
            Head::Bottom => None,
        }
    }
}

impl From<Var> for Head {
    fn from(v: Var) -> Self {
        Head::Atom(v)
    }
}

/// `ant -> con`, with an empty antecedent standing for `true`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HornClause {
    antecedent: Vec<Var>,
    consequent: Head,
}

impl HornClause {
    /// Rejects clauses whose consequent occurs in the antecedent.
    pub fn new(antecedent: impl IntoIterator<Item = Var>, consequent: Head) -> Result<Self, LogicError> {
        let mut antecedent: Vec<Var> = antecedent.into_iter().collect();
        antecedent.sort_unstable();
        antecedent.dedup();
        if let Head::Atom(c) = consequent {
            if antecedent.binary_search(&c).is_ok() {
                return Err(LogicError::Tautology(c.0));
            }
        }
        Ok(Self { antecedent, consequent })
    }

    /// Sorted, duplicate-free antecedent.
    pub fn antecedent(&self) -> &[Var] {
        &self.antecedent
    }

    pub fn consequent(&self) -> Head {
        self.consequent
    }

    pub fn max_var(&self) -> Option<Var> {
        self.antecedent.iter().copied().chain(self.consequent.atom()).max()
    }
}

/// Occurrence lists for counter-based forward chaining.
#[derive(Debug, Clone)]
pub(crate) struct ChainIndex {
    pub(crate) occurs: Vec<Vec<u32>>,
    pub(crate) facts: Vec<u32>,
}

/// A conjunction of Horn clauses over a table of `n_vars` variables.
#[derive(Debug, Clone)]
pub struct HornTheory {
    n_vars: usize,
    clauses: Vec<HornClause>,
    index: OnceLock<ChainIndex>,
}

impl PartialEq for HornTheory {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.clauses == other.clauses
    }
}

impl Eq for HornTheory {}

impl HornTheory {
    pub fn empty(n_vars: usize) -> Self {
        Self { n_vars, clauses: Vec::new(), index: OnceLock::new() }
    }

    pub fn new(n_vars: usize, clauses: Vec<HornClause>) -> Result<Self, LogicError> {
        for c in &clauses {
            if let Some(v) = c.max_var() {
                if v.index() >= n_vars {
                    return Err(LogicError::VarOutOfRange(v.0, n_vars));
                }
            }
        }
        Ok(Self { n_vars, clauses, index: OnceLock::new() })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Total number of literal occurrences.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(|c| c.antecedent.len() + 1).sum()
    }

    pub fn push(&mut self, clause: HornClause) -> Result<(), LogicError> {
        if let Some(v) = clause.max_var() {
            if v.index() >= self.n_vars {
                return Err(LogicError::VarOutOfRange(v.0, self.n_vars));
            }
        }
        self.clauses.push(clause);
        self.index = OnceLock::new();
        Ok(())
    }

    /// Union of two theories over the same table, in order, not normalized.
    pub fn union(&self, other: &HornTheory) -> Result<HornTheory, LogicError> {
        if self.n_vars != other.n_vars {
            return Err(LogicError::TableMismatch(self.n_vars, other.n_vars));
        }
        let clauses = self.clauses.iter().chain(&other.clauses).cloned().collect();
        Ok(Self { n_vars: self.n_vars, clauses, index: OnceLock::new() })
    }

    /// Canonical form: duplicates removed, clauses sorted by consequent then antecedent.
    pub fn normalized(&self) -> HornTheory {
        let mut seen = HashSet::with_capacity(self.clauses.len());
        let mut clauses: Vec<HornClause> = self.clauses.iter().filter(|c| seen.insert(*c)).cloned().collect();
        clauses.sort_by(|a, b| {
            a.consequent
                .cmp(&b.consequent)
                .then_with(|| a.antecedent.len().cmp(&b.antecedent.len()))
                .then_with(|| a.antecedent.cmp(&b.antecedent))
        });
        Self { n_vars: self.n_vars, clauses, index: OnceLock::new() }
    }

    pub(crate) fn index(&self) -> &ChainIndex {
        self.index.get_or_init(|| {
            let mut occurs = vec![Vec::new(); self.n_vars];
            let mut facts = Vec::new();
            for (ci, c) in self.clauses.iter().enumerate() {
                if c.antecedent.is_empty() {
                    facts.push(ci as u32);
                }
                for v in &c.antecedent {
                    occurs[v.index()].push(ci as u32);
                }
            }
            ChainIndex { occurs, facts }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tautologies_are_rejected() {
        assert!(matches!(HornClause::new([Var(0), Var(1)], Head::Atom(Var(1))), Err(LogicError::Tautology(1))));
    }

    #[test]
    fn antecedent_is_a_sorted_set() {
        let c = HornClause::new([Var(2), Var(0), Var(2)], Head::Bottom).unwrap();
        assert_eq!(c.antecedent(), &[Var(0), Var(2)]);
    }

    #[test]
    fn normalization_dedupes() {
        let c = HornClause::new([Var(0)], Var(1).into()).unwrap();
        let t = HornTheory::new(2, vec![c.clone(), c.clone()]).unwrap();
        assert_eq!(t.normalized().clauses(), &[c]);
    }

    #[test]
    fn out_of_range_clause_is_rejected() {
        let c = HornClause::new([Var(0)], Var(5).into()).unwrap();
        assert!(HornTheory::new(3, vec![c]).is_err());
    }
}
