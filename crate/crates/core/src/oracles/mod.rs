// SPDX-License-Identifier: Apache-2.0

//! Teachers: membership and equivalence oracles, sampling, and the remote
//! classifier protocol.

mod equivalence;
mod membership;
pub mod protocol;
mod remote;
mod sampling;

use thiserror::Error;

pub use equivalence::{
    eq_sampled, Counterexample, EqAnswer, EquivalenceOracle, ExactEquivalence, SampledEquivalence, Sign,
};
pub use membership::{mq_exact, Caching, Counting, ExactTeacher, FnTeacher, MembershipOracle, QueryStats};
pub use remote::{Connection, RemoteTeacher};
pub use sampling::{
    central_binomial, gen_random_partial, log2_hypothesis_count, sample_size, sample_size_log2, GenConfig, GenProbs,
    OracleConfig, SampleMode, Sampler,
};

use crate::logic::LogicError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("teacher transport failed after {attempts} attempt(s): {source}")]
    Transport {
        attempts: u32,
        #[source]
        source: std::io::Error,
    },
    #[error("teacher protocol violation: {0}")]
    Protocol(String),
    #[error("teacher reported an error: {0}")]
    Remote(String),
    #[error("teacher returned label {0}, expected 0 or 1")]
    LabelOutOfRange(String),
    #[error("teacher declares {remote} variables but the table has {local}")]
    Handshake { remote: usize, local: usize },
    #[error("query has {found} positions, teacher expects {expected}")]
    Width { expected: usize, found: usize },
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}
