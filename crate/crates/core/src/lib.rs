// SPDX-License-Identifier: Apache-2.0

//! Rule extraction from black-box binary classifiers.
//!
//! A classifier over `{0, 1, ?}` vectors is treated as a teacher for a
//! propositional Horn theory. The learner asks membership queries (does this
//! partial interpretation satisfy the hidden theory?) and equivalence queries
//! (is this hypothesis right, and if not, where does it fail?) until the
//! hypothesis is accepted or the query budget runs out.
//!
//! - [`logic`]: Horn clauses, partial interpretations, forward chaining.
//! - [`oracles`]: membership and equivalence teachers, sampling, the wire protocol.
//! - [`learner`]: the counterexample-driven Horn learner.
//! - [`pipeline`]: tabular binarization, dual variables, target theories, training data.
//! - [`eval`]: disagreement tables and run manifests.

pub mod eval;
pub mod learner;
pub mod logic;
pub mod oracles;
pub mod pipeline;

pub use learner::{learn, LearnResult, LearnerConfig, Termination};
pub use logic::{HornClause, HornTheory, PartialInterpretation, Truth, Var, VariableTable};
