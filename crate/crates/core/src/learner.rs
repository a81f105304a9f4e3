// SPDX-License-Identifier: Apache-2.0

//! Counterexample-driven learning of Horn theories from partial interpretations.
//!
//! The learner keeps an ordered sequence of negative examples. Each negative
//! counterexample either refines the first stored example it can shrink
//! (intersection still negative, true-set strictly smaller) or is appended.
//! The hypothesis is rebuilt from the sequence by asking, for every stored
//! example `I` and every candidate consequent `v`, whether the target entails
//! `true(I) -> v`. Entailment questions are posed as membership queries on the
//! partial interpretation `true(I) = 1, v = 0, rest = ?`, which falsifies the
//! target exactly when the rule is entailed.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{
    forward_chain, intersect, satisfies_partial, Head, HornClause, HornTheory, IntersectionMode, PartialInterpretation,
    Truth, Var, VariableTable,
};
use crate::oracles::{Counterexample, EqAnswer, EquivalenceOracle, MembershipOracle, OracleError, QueryStats, Sign};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("stored example {slot} is answered `yes` by the teacher")]
    Unsound { slot: usize },
    #[error("interpretation is classified alike by teacher and hypothesis")]
    NotADisagreement,
    #[error("invalid learner configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub struct LearnerConfig {
    pub eq_budget: u32,
    /// Rules assumed true of the target; included in every hypothesis, never refined.
    pub background: Option<HornTheory>,
    pub intersection_mode: IntersectionMode,
    /// Re-check after every iteration that each stored example is still negative.
    pub trace: bool,
    /// Treat positive counterexamples like negative ones (scan, then append).
    pub strict_paper_mode: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            eq_budget: 100,
            background: None,
            intersection_mode: IntersectionMode::ZeroFill,
            trace: false,
            strict_paper_mode: false,
        }
    }
}

/// The ordered sequence of stored negative examples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CounterexampleSeq {
    items: Vec<PartialInterpretation>,
}

impl CounterexampleSeq {
    pub fn items(&self) -> &[PartialInterpretation] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EquivalenceYes,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct LearnResult {
    pub hypothesis: HornTheory,
    pub stats: QueryStats,
    pub terminated_by: Termination,
    pub seq_snapshot: CounterexampleSeq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Replace,
    Append,
    RebuildOnly,
}

/// One line of the JSON trace, emitted after every counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iter: u64,
    pub ce: String,
    pub ce_sign: Sign,
    pub action: Action,
    pub slot: Option<usize>,
    pub mq_so_far: u64,
}

fn entailment_probe(n_vars: usize, alpha: &[Var], v: Head) -> PartialInterpretation {
    let mut j = PartialInterpretation::unknown(n_vars);
    for &a in alpha {
        j.set(a, Truth::True);
    }
    if let Head::Atom(v) = v {
        j.set(v, Truth::False);
    }
    j
}

fn candidates(n_vars: usize, alpha: &[Var]) -> Vec<Head> {
    (0..n_vars)
        .map(Var::from)
        .filter(|v| alpha.binary_search(v).is_err())
        .map(Head::Atom)
        .chain(std::iter::once(Head::Bottom))
        .collect()
}

/// Asks whether the target entails `alpha -> v`.
///
/// `alpha` must be sorted and must not contain `v`.
pub fn entailment_mq(
    teacher: &mut dyn MembershipOracle,
    table: &VariableTable,
    alpha: &[Var],
    v: Head,
) -> Result<bool, OracleError> {
    debug_assert!(alpha.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(v.atom().is_none_or(|v| !alpha.contains(&v)));
    Ok(!teacher.query(&entailment_probe(table.len(), alpha, v))?)
}

/// Every `v` in `V ∪ {⊥} \ alpha` such that the target entails `alpha -> v`.
///
/// Issues exactly one membership query per candidate, in a single batch.
pub fn rhs(teacher: &mut dyn MembershipOracle, table: &VariableTable, alpha: &[Var]) -> Result<Vec<Head>, OracleError> {
    let cands = candidates(table.len(), alpha);
    let probes: Vec<_> = cands.iter().map(|&v| entailment_probe(table.len(), alpha, v)).collect();
    let answers = teacher.query_batch(&probes)?;
    Ok(cands.into_iter().zip(answers).filter(|(_, yes)| !yes).map(|(v, _)| v).collect())
}

fn clauses_for<'a, I>(alpha: &'a [Var], heads: I) -> impl Iterator<Item = HornClause> + 'a
where
    I: IntoIterator<Item = Head>,
    I::IntoIter: 'a,
{
    heads
        .into_iter()
        .map(move |u| HornClause::new(alpha.iter().copied(), u).expect("candidates exclude the antecedent"))
}

/// `background ∪ { true(I) -> u : I in seq, u in rhs(true(I)) }`, normalized.
pub fn build_hypothesis(
    seq: &CounterexampleSeq,
    teacher: &mut dyn MembershipOracle,
    table: &VariableTable,
    background: Option<&HornTheory>,
) -> Result<HornTheory, OracleError> {
    let mut h = background.cloned().unwrap_or_else(|| HornTheory::empty(table.len()));
    for item in &seq.items {
        let alpha = item.true_set();
        for c in clauses_for(&alpha, rhs(teacher, table, &alpha)?) {
            h.push(c)?;
        }
    }
    Ok(h.normalized())
}

/// Signs a disagreement between teacher and hypothesis.
pub fn classify_counterexample(
    i: &PartialInterpretation,
    hypothesis: &HornTheory,
    teacher: &mut dyn MembershipOracle,
) -> Result<Sign, LearnError> {
    let teacher_yes = teacher.query(i)?;
    let hypothesis_yes = satisfies_partial(i, hypothesis);
    match (teacher_yes, hypothesis_yes) {
        (false, true) => Ok(Sign::Negative),
        (true, false) => Ok(Sign::Positive),
        _ => Err(LearnError::NotADisagreement),
    }
}

struct Slot {
    example: PartialInterpretation,
    alpha: Vec<Var>,
    /// Consequents dropped because a positive counterexample falsified them.
    pruned: BTreeSet<Head>,
}

struct Session<'a> {
    teacher: &'a mut dyn MembershipOracle,
    table: &'a VariableTable,
    background: HornTheory,
    mode: IntersectionMode,
    slots: Vec<Slot>,
    rhs_memo: HashMap<Vec<Var>, Vec<Head>>,
    stats: QueryStats,
}

impl Session<'_> {
    /// Membership query; anything that already falsifies the background is
    /// answered `no` without consulting the teacher.
    fn ask(&mut self, j: &PartialInterpretation) -> Result<bool, OracleError> {
        if !satisfies_partial(j, &self.background) {
            return Ok(false);
        }
        let start = Instant::now();
        let y = self.teacher.query(j)?;
        self.stats.mq_time += start.elapsed();
        self.stats.mq_count += 1;
        Ok(y)
    }

    fn rhs(&mut self, alpha: &[Var]) -> Result<Vec<Head>, OracleError> {
        if let Some(hit) = self.rhs_memo.get(alpha) {
            self.stats.cache_hits += 1;
            return Ok(hit.clone());
        }
        let n = self.table.len();
        let mut entailed = Vec::new();
        let mut asked = Vec::new();
        let mut probes = Vec::new();
        for v in candidates(n, alpha) {
            let probe = entailment_probe(n, alpha, v);
            if satisfies_partial(&probe, &self.background) {
                asked.push(v);
                probes.push(probe);
            } else {
                entailed.push(v);
            }
        }
        if !probes.is_empty() {
            let start = Instant::now();
            let answers = self.teacher.query_batch(&probes)?;
            self.stats.mq_time += start.elapsed();
            self.stats.mq_count += probes.len() as u64;
            if answers.len() != probes.len() {
                return Err(OracleError::Protocol(format!(
                    "batch of {} answered with {} labels",
                    probes.len(),
                    answers.len()
                )));
            }
            entailed.extend(asked.into_iter().zip(answers).filter(|(_, yes)| !yes).map(|(v, _)| v));
        }
        entailed.sort();
        self.rhs_memo.insert(alpha.to_vec(), entailed.clone());
        Ok(entailed)
    }

    fn slot_clauses(&mut self) -> Result<Vec<(usize, HornClause)>, OracleError> {
        let mut out = Vec::new();
        for k in 0..self.slots.len() {
            let alpha = self.slots[k].alpha.clone();
            let heads = self.rhs(&alpha)?;
            let pruned = &self.slots[k].pruned;
            out.extend(clauses_for(&alpha, heads.into_iter().filter(|u| !pruned.contains(u))).map(|c| (k, c)));
        }
        Ok(out)
    }

    fn hypothesis(&mut self) -> Result<HornTheory, OracleError> {
        let mut h = self.background.clone();
        for (_, c) in self.slot_clauses()? {
            h.push(c)?;
        }
        Ok(h.normalized())
    }

    /// Drops learned rules until the positive example `i` satisfies the hypothesis.
    fn prune_for(&mut self, i: &PartialInterpretation) -> Result<(), OracleError> {
        loop {
            let learned = self.slot_clauses()?;
            let mut h = self.background.clone();
            for (_, c) in &learned {
                h.push(c.clone())?;
            }
            if satisfies_partial(i, &h) {
                return Ok(());
            }
            let closure = forward_chain(&h, i.true_set());
            let mut removed = false;
            for (k, c) in learned {
                let fired = c.antecedent().iter().all(|v| closure.contains(*v));
                let clashes = match c.consequent() {
                    Head::Bottom => true,
                    Head::Atom(u) => i.get(u) == Truth::False,
                };
                if fired && clashes {
                    self.slots[k].pruned.insert(c.consequent());
                    removed = true;
                }
            }
            if !removed {
                // only the background rejects it; nothing learned to drop
                return Ok(());
            }
        }
    }

    fn refine_or_append(&mut self, i: &PartialInterpretation) -> Result<(Action, usize), OracleError> {
        for k in 0..self.slots.len() {
            let meet = intersect(&self.slots[k].example, i, self.mode);
            let alpha = meet.true_set();
            if alpha.len() < self.slots[k].alpha.len() && !self.ask(&meet)? {
                self.slots[k] = Slot { example: meet, alpha, pruned: BTreeSet::new() };
                return Ok((Action::Replace, k));
            }
        }
        self.slots.push(Slot { example: i.clone(), alpha: i.true_set(), pruned: BTreeSet::new() });
        Ok((Action::Append, self.slots.len() - 1))
    }

    fn check_sound(&mut self) -> Result<(), LearnError> {
        for k in 0..self.slots.len() {
            if self.teacher.query(&self.slots[k].example)? {
                return Err(LearnError::Unsound { slot: k });
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> CounterexampleSeq {
        CounterexampleSeq { items: self.slots.iter().map(|s| s.example.clone()).collect() }
    }
}

/// Runs the learner until the equivalence oracle says yes or the budget is spent.
///
/// `on_event` receives one [`TraceEvent`] per counterexample.
pub fn learn(
    teacher: &mut dyn MembershipOracle,
    eq: &mut dyn EquivalenceOracle,
    table: &VariableTable,
    config: &LearnerConfig,
    mut on_event: impl FnMut(&TraceEvent),
) -> Result<LearnResult, LearnError> {
    if config.eq_budget < 1 {
        return Err(LearnError::Config("eq_budget must be at least 1".into()));
    }
    if teacher.n_vars() != table.len() {
        return Err(OracleError::Width { expected: teacher.n_vars(), found: table.len() }.into());
    }
    let background = match &config.background {
        Some(b) if b.n_vars() != table.len() => {
            return Err(LearnError::Config(format!(
                "background has {} variables, table has {}",
                b.n_vars(),
                table.len()
            )))
        }
        Some(b) => b.normalized(),
        None => HornTheory::empty(table.len()),
    };
    let mut session = Session {
        teacher,
        table,
        background,
        mode: config.intersection_mode,
        slots: Vec::new(),
        rhs_memo: HashMap::new(),
        stats: QueryStats::default(),
    };
    let mut hypothesis = session.background.clone();
    let mut iter = 0u64;
    let terminated_by = loop {
        if session.stats.eq_count >= u64::from(config.eq_budget) {
            break Termination::BudgetExhausted;
        }
        session.stats.eq_count += 1;
        let start = Instant::now();
        let answer = eq.equivalent(&hypothesis, &mut *session.teacher)?;
        session.stats.eq_time += start.elapsed();
        let Counterexample { interpretation: ce, sign } = match answer {
            EqAnswer::Yes => break Termination::EquivalenceYes,
            EqAnswer::Counterexample(c) => c,
        };
        iter += 1;
        let (action, slot) = if sign == Sign::Negative || config.strict_paper_mode {
            let (a, k) = session.refine_or_append(&ce)?;
            (a, Some(k))
        } else {
            session.prune_for(&ce)?;
            (Action::RebuildOnly, None)
        };
        hypothesis = session.hypothesis()?;
        on_event(&TraceEvent { iter, ce: ce.encode(), ce_sign: sign, action, slot, mq_so_far: session.stats.mq_count });
        if config.trace && !config.strict_paper_mode {
            session.check_sound()?;
        }
    };
    Ok(LearnResult { hypothesis, stats: session.stats, terminated_by, seq_snapshot: session.snapshot() })
}
