// SPDX-License-Identifier: Apache-2.0

//! From tabular data to Horn targets and labelled training sets.
//!
//! Quantitative features are cut into low/mid/high indicators, every derived
//! variable `v` gets a dual `not_v` standing for its negation, each row becomes
//! one rule, and the rules plus `(v ∧ not_v) → ⊥` form the target theory used
//! to label generated examples.

mod dataset;
mod generate;
mod schema;
mod synth;
mod transform;

use thiserror::Error;

pub use dataset::{ColumnKind, ColumnMeta, DatasetMeta, RawDataset, RawRow};
pub use generate::{gen_training_set, read_training_set, write_training_set, GenDataConfig, LabeledExample};
pub use schema::{
    binarize, binarize_row, fit_schema, sanitize, tercile_cuts, BinarizationSchema, Bins, CutStrategy, FeatureSchema,
    BIN_SUFFIXES,
};
pub use synth::{synth_hcc, SynthConfig};
pub use transform::{
    build_target, disjointness_clauses, dualize, is_disjointness, project, read_interpretations, row_to_rule,
    target_from_rows, write_interpretations,
};

use crate::logic::LogicError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid dataset metadata: {0}")]
    Meta(String),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("line {line}, column `{column}`: invalid value `{value}`")]
    Value { line: usize, column: String, value: String },
    #[error("invalid cut-points: {0}")]
    Cuts(String),
    #[error("feature `{0}` has fewer than 3 distinct values; give explicit cuts or declare it qualitative")]
    Degenerate(String),
    #[error("row has no label value")]
    MissingLabel,
    #[error("label variable has no dual")]
    LabelWithoutDual,
    #[error("row has {found} positions, table has {expected}")]
    Width { expected: usize, found: usize },
    #[error("no {label} example found after {attempts} attempts; change the sampling distribution")]
    Stall { label: &'static str, attempts: u64 },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}
