// SPDX-License-Identifier: Apache-2.0

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{MembershipOracle, OracleConfig, OracleError, Sampler};
use crate::logic::{
    satisfies_partial, theory_equiv, Equivalence, HornTheory, PartialInterpretation, Side, VariableTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// Satisfies the target, falsifies the hypothesis.
    Positive,
    /// Satisfies the hypothesis, falsifies the target.
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub interpretation: PartialInterpretation,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqAnswer {
    Yes,
    Counterexample(Counterexample),
}

/// Answers "is this hypothesis equivalent to the target?".
///
/// The teacher is passed in so that sampling oracles can label their sample
/// with the same membership oracle the learner uses.
pub trait EquivalenceOracle {
    fn equivalent(
        &mut self,
        hypothesis: &HornTheory,
        teacher: &mut dyn MembershipOracle,
    ) -> Result<EqAnswer, OracleError>;
}

/// Exact equivalence against a known target theory.
#[derive(Debug, Clone)]
pub struct ExactEquivalence {
    target: HornTheory,
}

impl ExactEquivalence {
    pub fn new(target: HornTheory) -> Self {
        Self { target }
    }
}

impl EquivalenceOracle for ExactEquivalence {
    fn equivalent(
        &mut self,
        hypothesis: &HornTheory,
        _teacher: &mut dyn MembershipOracle,
    ) -> Result<EqAnswer, OracleError> {
        let verdict = theory_equiv(hypothesis, &self.target)?;
        Ok(match verdict {
            Equivalence::Equivalent => EqAnswer::Yes,
            Equivalence::Counterexample { interpretation, satisfied_by } => {
                let sign = match satisfied_by {
                    Side::First => Sign::Negative,
                    Side::Second => Sign::Positive,
                };
                EqAnswer::Counterexample(Counterexample { interpretation, sign })
            }
        })
    }
}

/// Draws `n_samples` interpretations and returns the first one on which the
/// teacher and the hypothesis disagree.
pub fn eq_sampled(
    hypothesis: &HornTheory,
    teacher: &mut dyn MembershipOracle,
    sampler: &mut Sampler,
    table: &VariableTable,
    n_samples: u64,
    batch_size: usize,
) -> Result<EqAnswer, OracleError> {
    let mut drawn = 0u64;
    let mut batch = Vec::with_capacity(batch_size);
    while drawn < n_samples {
        let take = (n_samples - drawn).min(batch_size as u64) as usize;
        batch.clear();
        batch.extend((0..take).map(|_| sampler.draw(table)));
        drawn += take as u64;
        let labels = teacher.query_batch(&batch)?;
        if labels.len() != batch.len() {
            return Err(OracleError::Protocol(format!(
                "batch of {} answered with {} labels",
                batch.len(),
                labels.len()
            )));
        }
        for (x, teacher_yes) in batch.iter().zip(labels) {
            let hypothesis_yes = satisfies_partial(x, hypothesis);
            if teacher_yes != hypothesis_yes {
                let sign = if teacher_yes { Sign::Positive } else { Sign::Negative };
                return Ok(EqAnswer::Counterexample(Counterexample { interpretation: x.clone(), sign }));
            }
        }
    }
    Ok(EqAnswer::Yes)
}

/// Sampling equivalence oracle with a persistent seeded stream.
#[derive(Debug, Clone)]
pub struct SampledEquivalence {
    table: VariableTable,
    sampler: Sampler,
    n_samples: u64,
    batch_size: usize,
    queries: u64,
    elapsed: Duration,
}

impl SampledEquivalence {
    pub fn new(config: &OracleConfig, table: VariableTable) -> Result<Self, OracleError> {
        config.validate()?;
        let n_samples = config.samples_per_query(table.len());
        Ok(Self {
            sampler: Sampler::new(config.gen, config.rng_seed),
            n_samples,
            batch_size: config.batch_size,
            table,
            queries: 0,
            elapsed: Duration::ZERO,
        })
    }

    pub fn samples_per_query(&self) -> u64 {
        self.n_samples
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }
}

impl EquivalenceOracle for SampledEquivalence {
    fn equivalent(
        &mut self,
        hypothesis: &HornTheory,
        teacher: &mut dyn MembershipOracle,
    ) -> Result<EqAnswer, OracleError> {
        let start = Instant::now();
        self.queries += 1;
        let r = eq_sampled(hypothesis, teacher, &mut self.sampler, &self.table, self.n_samples, self.batch_size);
        self.elapsed += start.elapsed();
        r
    }
}
