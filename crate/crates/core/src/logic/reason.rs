// SPDX-License-Identifier: Apache-2.0

//! Polynomial-time reasoning over Horn theories.
//!
//! Everything here reduces to one counter-based forward-chaining pass
//! (linear in the total clause size).

use super::{Head, HornClause, HornTheory, LogicError, PartialInterpretation, Truth, Var};

/// Least fixpoint of a theory over a set of facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    members: Vec<bool>,
    bottom: bool,
}

impl Closure {
    pub fn contains(&self, v: Var) -> bool {
        self.members[v.index()]
    }

    /// True if some clause with consequent ⊥ fired.
    pub fn bottom_derived(&self) -> bool {
        self.bottom
    }

    pub fn vars(&self) -> Vec<Var> {
        self.members.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| Var::from(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The total interpretation mapping exactly the closure to 1.
    pub fn to_interpretation(&self) -> PartialInterpretation {
        PartialInterpretation::new(self.members.iter().map(|m| if *m { Truth::True } else { Truth::False }).collect())
    }
}

/// Runs forward chaining; `stop` is consulted for every newly derived
/// variable and may abort the pass early by returning true.
fn chain(
    theory: &HornTheory,
    facts: impl IntoIterator<Item = Var>,
    mut stop: impl FnMut(Option<Var>) -> bool,
) -> (Closure, bool) {
    let n = theory.n_vars();
    let index = theory.index();
    let clauses = theory.clauses();
    let mut members = vec![false; n];
    let mut remaining: Vec<u32> = clauses.iter().map(|c| c.antecedent().len() as u32).collect();
    let mut queue: Vec<Var> = Vec::new();
    let mut bottom = false;

    for v in facts {
        if !members[v.index()] {
            members[v.index()] = true;
            queue.push(v);
        }
    }

    macro_rules! fire {
        ($ci:expr) => {
            match clauses[$ci as usize].consequent() {
                Head::Bottom => {
                    bottom = true;
                    if stop(None) {
                        return (Closure { members, bottom }, true);
                    }
                }
                Head::Atom(u) => {
                    if !members[u.index()] {
                        members[u.index()] = true;
                        queue.push(u);
                        if stop(Some(u)) {
                            return (Closure { members, bottom }, true);
                        }
                    }
                }
            }
        };
    }

    for &ci in &index.facts {
        fire!(ci);
    }
    while let Some(v) = queue.pop() {
        for &ci in &index.occurs[v.index()] {
            let r = &mut remaining[ci as usize];
            *r -= 1;
            if *r == 0 {
                fire!(ci);
            }
        }
    }
    (Closure { members, bottom }, false)
}

/// Least set containing `facts` closed under every clause of `theory`.
pub fn forward_chain(theory: &HornTheory, facts: impl IntoIterator<Item = Var>) -> Closure {
    chain(theory, facts, |_| false).0
}

/// Whether a total interpretation satisfies every clause, checked clause by clause.
pub fn satisfies_total(i: &PartialInterpretation, theory: &HornTheory) -> Result<bool, LogicError> {
    if !i.is_total() {
        return Err(LogicError::NotTotal);
    }
    Ok(theory.clauses().iter().all(|c| {
        !c.antecedent().iter().all(|v| i.is_true(*v)) || matches!(c.consequent(), Head::Atom(u) if i.is_true(u))
    }))
}

/// Whether some completion of the `?` positions satisfies the theory.
///
/// Horn theories have a least model above any fact set, so it suffices to
/// close the true-set and check that nothing forced false (or ⊥) shows up.
pub fn satisfies_partial(i: &PartialInterpretation, theory: &HornTheory) -> bool {
    assert_eq!(i.len(), theory.n_vars(), "interpretation width differs from theory");
    let (closure, aborted) = chain(theory, i.true_set(), |derived| match derived {
        None => true,
        Some(v) => i.get(v) == Truth::False,
    });
    !(aborted || closure.bottom_derived())
}

/// `theory ⊨ clause`.
pub fn entails(theory: &HornTheory, clause: &HornClause) -> bool {
    let target = clause.consequent();
    let (closure, _) = chain(theory, clause.antecedent().iter().copied(), |derived| match derived {
        None => true,
        Some(v) => target == Head::Atom(v),
    });
    closure.bottom_derived()
        || match target {
            Head::Atom(v) => closure.contains(v),
            Head::Bottom => false,
        }
}

/// Which theory of a pair satisfies a counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A total interpretation satisfied by exactly one of the two theories.
    Counterexample {
        interpretation: PartialInterpretation,
        satisfied_by: Side,
    },
}

/// Decides logical equivalence by clause-wise entailment in both directions.
pub fn theory_equiv(t1: &HornTheory, t2: &HornTheory) -> Result<Equivalence, LogicError> {
    if t1.n_vars() != t2.n_vars() {
        return Err(LogicError::TableMismatch(t1.n_vars(), t2.n_vars()));
    }
    for (holder, other, side) in [(t1, t2, Side::First), (t2, t1, Side::Second)] {
        if let Some(c) = other.clauses().iter().find(|c| !entails(holder, c)) {
            let interpretation = forward_chain(holder, c.antecedent().iter().copied()).to_interpretation();
            return Ok(Equivalence::Counterexample { interpretation, satisfied_by: side });
        }
    }
    Ok(Equivalence::Equivalent)
}
