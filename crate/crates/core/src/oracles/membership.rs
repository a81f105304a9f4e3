// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::logic::{satisfies_partial, HornTheory, PartialInterpretation};

/// Answers "does this partial interpretation satisfy the hidden target?".
///
/// `true` is the teacher's `yes`.
pub trait MembershipOracle {
    /// Width of the interpretations this teacher accepts.
    fn n_vars(&self) -> usize;

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError>;

    /// Answers are positionally aligned with `items`.
    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        items.iter().map(|i| self.query(i)).collect()
    }
}

impl<T: MembershipOracle + ?Sized> MembershipOracle for &mut T {
    fn n_vars(&self) -> usize {
        (**self).n_vars()
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        (**self).query(i)
    }

    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        (**self).query_batch(items)
    }
}

impl<T: MembershipOracle + ?Sized> MembershipOracle for Box<T> {
    fn n_vars(&self) -> usize {
        (**self).n_vars()
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        (**self).query(i)
    }

    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        (**self).query_batch(items)
    }
}

/// Teacher backed by a known Horn theory.
#[derive(Debug, Clone)]
pub struct ExactTeacher {
    theory: HornTheory,
}

impl ExactTeacher {
    pub fn new(theory: HornTheory) -> Self {
        Self { theory }
    }

    pub fn theory(&self) -> &HornTheory {
        &self.theory
    }
}

/// Exact membership: `yes` iff `i` satisfies `theory`.
pub fn mq_exact(theory: &HornTheory, i: &PartialInterpretation) -> bool {
    satisfies_partial(i, theory)
}

impl MembershipOracle for ExactTeacher {
    fn n_vars(&self) -> usize {
        self.theory.n_vars()
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        if i.len() != self.theory.n_vars() {
            return Err(OracleError::Width { expected: self.theory.n_vars(), found: i.len() });
        }
        Ok(mq_exact(&self.theory, i))
    }
}

/// Any closure can serve as a teacher, e.g. a classifier already in memory.
pub struct FnTeacher<F> {
    n_vars: usize,
    f: F,
}

impl<F: FnMut(&PartialInterpretation) -> bool> FnTeacher<F> {
    pub fn new(n_vars: usize, f: F) -> Self {
        Self { n_vars, f }
    }
}

impl<F: FnMut(&PartialInterpretation) -> bool> MembershipOracle for FnTeacher<F> {
    fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        Ok((self.f)(i))
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        f64::deserialize(d).map(Duration::from_secs_f64)
    }
}

/// Query counters. All counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub mq_count: u64,
    pub eq_count: u64,
    pub cache_hits: u64,
    #[serde(with = "duration_secs")]
    pub mq_time: Duration,
    #[serde(with = "duration_secs")]
    pub eq_time: Duration,
}

/// Counts membership queries (batch items count individually) and time spent.
pub struct Counting<T> {
    inner: T,
    stats: QueryStats,
}

impl<T: MembershipOracle> Counting<T> {
    pub fn new(inner: T) -> Self {
        Self { inner, stats: QueryStats::default() }
    }

    pub fn stats(&self) -> QueryStats {
        self.stats
    }

    pub fn into_inner(self) -> T {
        self.inner
    }
}

impl<T: MembershipOracle> MembershipOracle for Counting<T> {
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        let start = Instant::now();
        let r = self.inner.query(i);
        self.stats.mq_time += start.elapsed();
        self.stats.mq_count += 1;
        r
    }

    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        let start = Instant::now();
        let r = self.inner.query_batch(items);
        self.stats.mq_time += start.elapsed();
        self.stats.mq_count += items.len() as u64;
        r
    }
}

/// Memoizes answers keyed by the wire encoding of the query.
pub struct Caching<T> {
    inner: T,
    cache: HashMap<String, bool>,
    hits: u64,
    upstream: u64,
}

impl<T: MembershipOracle> Caching<T> {
    pub fn new(inner: T) -> Self {
        Self { inner, cache: HashMap::new(), hits: 0, upstream: 0 }
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits
    }

    /// Queries actually forwarded to the wrapped teacher.
    pub fn upstream_queries(&self) -> u64 {
        self.upstream
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    pub fn into_inner(self) -> T {
        self.inner
    }
}

impl<T: MembershipOracle> MembershipOracle for Caching<T> {
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    fn query(&mut self, i: &PartialInterpretation) -> Result<bool, OracleError> {
        let key = i.encode();
        if let Some(&y) = self.cache.get(&key) {
            self.hits += 1;
            return Ok(y);
        }
        let y = self.inner.query(i)?;
        self.upstream += 1;
        self.cache.insert(key, y);
        Ok(y)
    }

    fn query_batch(&mut self, items: &[PartialInterpretation]) -> Result<Vec<bool>, OracleError> {
        let keys: Vec<String> = items.iter().map(|i| i.encode()).collect();
        let mut pending: Vec<usize> = Vec::new();
        let mut fresh: HashMap<&str, usize> = HashMap::new();
        for (k, key) in keys.iter().enumerate() {
            if !self.cache.contains_key(key) && !fresh.contains_key(key.as_str()) {
                fresh.insert(key, pending.len());
                pending.push(k);
            }
        }
        if !pending.is_empty() {
            let batch: Vec<PartialInterpretation> = pending.iter().map(|&k| items[k].clone()).collect();
            let answers = self.inner.query_batch(&batch)?;
            if answers.len() != batch.len() {
                return Err(OracleError::Protocol(format!(
                    "batch of {} answered with {} labels",
                    batch.len(),
                    answers.len()
                )));
            }
            self.upstream += batch.len() as u64;
            for (&k, y) in pending.iter().zip(answers) {
                self.cache.insert(keys[k].clone(), y);
            }
        }
        self.hits += (items.len() - pending.len()) as u64;
        Ok(keys.iter().map(|k| self.cache[k]).collect())
    }
}
