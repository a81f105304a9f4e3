// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference semantics. Nothing here calls the library's
//! reasoning code; only the data types are shared.

#![allow(dead_code)]

use horn_extract::logic::{Head, HornClause, HornTheory, PartialInterpretation, Truth, Var};

pub fn clause_holds(bits: &[bool], c: &HornClause) -> bool {
    if !c.antecedent().iter().all(|v| bits[v.index()]) {
        return true;
    }
    match c.consequent() {
        Head::Atom(u) => bits[u.index()],
        Head::Bottom => false,
    }
}

pub fn total_model(bits: &[bool], t: &HornTheory) -> bool {
    t.clauses().iter().all(|c| clause_holds(bits, c))
}

pub fn all_totals(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |m| (0..n).map(|k| m >> k & 1 == 1).collect())
}

pub fn all_partials(n: usize) -> impl Iterator<Item = PartialInterpretation> {
    (0..3u64.pow(n as u32)).map(move |mut m| {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(match m % 3 {
                0 => Truth::False,
                1 => Truth::True,
                _ => Truth::Unknown,
            });
            m /= 3;
        }
        PartialInterpretation::new(values)
    })
}

pub fn completions(i: &PartialInterpretation) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::with_capacity(i.len())];
    for t in i.values() {
        out = match t {
            Truth::True => out
                .into_iter()
                .map(|mut b| {
                    b.push(true);
                    b
                })
                .collect(),
            Truth::False => out
                .into_iter()
                .map(|mut b| {
                    b.push(false);
                    b
                })
                .collect(),
            Truth::Unknown => out
                .into_iter()
                .flat_map(|b| {
                    let mut f = b.clone();
                    f.push(false);
                    let mut t = b;
                    t.push(true);
                    [f, t]
                })
                .collect(),
        };
    }
    out
}

/// Some completion of `i` is a model of `t`.
pub fn sat_partial(i: &PartialInterpretation, t: &HornTheory) -> bool {
    completions(i).iter().any(|b| total_model(b, t))
}

/// Every model of `t` satisfies `c`.
pub fn entails(t: &HornTheory, c: &HornClause) -> bool {
    all_totals(t.n_vars()).all(|b| !total_model(&b, t) || clause_holds(&b, c))
}

pub fn equivalent(t1: &HornTheory, t2: &HornTheory) -> bool {
    all_totals(t1.n_vars()).all(|b| total_model(&b, t1) == total_model(&b, t2))
}

/// Naive fixpoint: sweep all clauses until nothing changes. Returns the
/// derived atoms and whether ⊥ was derived.
pub fn naive_closure(t: &HornTheory, facts: &[Var]) -> (Vec<bool>, bool) {
    let mut m = vec![false; t.n_vars()];
    for f in facts {
        m[f.index()] = true;
    }
    let mut bottom = false;
    loop {
        let mut changed = false;
        for c in t.clauses() {
            if c.antecedent().iter().all(|v| m[v.index()]) {
                match c.consequent() {
                    Head::Atom(u) if !m[u.index()] => {
                        m[u.index()] = true;
                        changed = true;
                    }
                    Head::Bottom if !bottom => {
                        bottom = true;
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            return (m, bottom);
        }
    }
}

/// Partial satisfaction by naive closure; usable at widths where completion
/// enumeration is out of reach.
pub fn naive_sat_partial(i: &PartialInterpretation, t: &HornTheory) -> bool {
    let (m, bottom) = naive_closure(t, &i.true_set());
    !bottom && (0..i.len()).all(|k| !(m[k] && i.values()[k] == Truth::False))
}

/// Every non-tautological clause over `n` variables.
pub fn all_clauses(n: usize) -> Vec<HornClause> {
    let mut out = Vec::new();
    for mask in 0u64..1 << n {
        let ant: Vec<Var> = (0..n).filter(|k| mask >> k & 1 == 1).map(Var::from).collect();
        out.push(HornClause::new(ant.clone(), Head::Bottom).unwrap());
        for u in (0..n).filter(|k| mask >> k & 1 == 0) {
            out.push(HornClause::new(ant.clone(), Head::Atom(Var::from(u))).unwrap());
        }
    }
    out
}
