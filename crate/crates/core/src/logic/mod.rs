// SPDX-License-Identifier: Apache-2.0

//! Horn logic over partial interpretations.

mod clause;
mod interp;
mod reason;
mod rules;
mod table;

use rand::Rng;
use thiserror::Error;

pub use clause::{Head, HornClause, HornTheory};
pub use interp::{intersect, IntersectionMode, PartialInterpretation, Truth};
pub use reason::{
    entails, forward_chain, satisfies_partial, satisfies_total, theory_equiv, Closure, Equivalence, Side,
};
pub use rules::{parse_rule, parse_rules, render_rule, render_rules, rule_file_names, ParseError};
pub use table::{is_valid_name, Var, VariableTable, DUAL_PREFIX};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("variable name `{0}` does not match [A-Za-z_][A-Za-z0-9_.]*")]
    InvalidName(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` cannot be its own dual")]
    SelfDual(String),
    #[error("variable `{0}` already has a different dual")]
    ConflictingDual(String),
    #[error("variable index {0} out of range for a table of {1}")]
    VarOutOfRange(u32, usize),
    #[error("tautological clause: consequent v{0} occurs in its antecedent")]
    Tautology(u32),
    #[error("interpretation contains `?`; use partial satisfaction")]
    NotTotal,
    #[error("theories range over different tables ({0} vs {1} variables)")]
    TableMismatch(usize, usize),
    #[error("invalid character `{found}` at position {pos} in interpretation encoding")]
    BadEncoding { pos: usize, found: char },
    #[error("malformed variable table: {0}")]
    TableFormat(String),
}

/// Random Horn theory with `n_clauses` clauses over `n_vars` variables.
///
/// Antecedents have up to three variables; about one clause in five has ⊥
/// as its consequent. Used for property tests and benchmarks.
pub fn random_theory<R: Rng + ?Sized>(rng: &mut R, n_vars: usize, n_clauses: usize) -> HornTheory {
    assert!(n_vars >= 1);
    let mut clauses = Vec::with_capacity(n_clauses);
    while clauses.len() < n_clauses {
        let width = rng.gen_range(0..=3.min(n_vars));
        let ant: Vec<Var> = (0..width).map(|_| Var::from(rng.gen_range(0..n_vars))).collect();
        let head = if rng.gen_bool(0.2) { Head::Bottom } else { Head::Atom(Var::from(rng.gen_range(0..n_vars))) };
        if let Ok(c) = HornClause::new(ant, head) {
            clauses.push(c);
        }
    }
    HornTheory::new(n_vars, clauses).expect("indices drawn in range")
}
