// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{ColumnKind, ColumnMeta, DatasetMeta, RawDataset, RawRow};
use super::PipelineError;

/// Shape of a synthetic clinical-style dataset. Defaults follow the HCC
/// survival data: 165 patients, 26 quantitative and 23 qualitative features,
/// about 10% missing cells, 102 survivors and 63 deaths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub quantitative: usize,
    pub qualitative: usize,
    pub missing_rate: f64,
    pub positives: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { rows: 165, quantitative: 26, qualitative: 23, missing_rate: 0.1022, positives: 102 }
    }
}

impl SynthConfig {
    /// A dataset of the given shape keeping the default survivor ratio.
    pub fn with_shape(rows: usize, quantitative: usize, qualitative: usize) -> Self {
        let d = Self::default();
        let positives = (rows * d.positives + d.rows / 2) / d.rows;
        Self { rows, quantitative, qualitative, positives, ..d }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.positives > self.rows {
            return Err(PipelineError::Config(format!("{} positives out of {} rows", self.positives, self.rows)));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(PipelineError::Config(format!("missing rate {} not in [0, 1)", self.missing_rate)));
        }
        if self.quantitative > 0 && self.rows < 3 {
            return Err(PipelineError::Config("quantitative features need at least 3 rows".into()));
        }
        Ok(())
    }
}

/// Deterministic synthetic dataset for `config` and `seed`.
///
/// Quantitative columns `q01..` take one-decimal values in a declared range
/// `[0, R]`; qualitative columns `b01..` are 0/1; the label column is
/// `survival`. Labels go to the rows with the highest score under a hidden
/// sparse linear rule plus noise, so the label depends on a few features.
/// Every quantitative column keeps at least 3 distinct observed values.
pub fn synth_hcc(config: &SynthConfig, seed: u64) -> Result<RawDataset, PipelineError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = |n: usize| n.max(1).to_string().len().max(2);
    let mut columns = Vec::new();
    for k in 0..config.quantitative {
        let hi = f64::from(rng.gen_range(2u32..=100) * 10);
        columns.push(ColumnMeta {
            name: format!("q{:0w$}", k + 1, w = width(config.quantitative)),
            kind: ColumnKind::Quantitative,
            range: Some((0.0, hi)),
        });
    }
    for k in 0..config.qualitative {
        columns.push(ColumnMeta {
            name: format!("b{:0w$}", k + 1, w = width(config.qualitative)),
            kind: ColumnKind::Qualitative,
            range: None,
        });
    }

    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(columns.len()); config.rows];
    for col in &columns {
        let column = loop {
            let column: Vec<Option<f64>> = (0..config.rows)
                .map(|_| {
                    let value = match col.range {
                        Some((_, hi)) => (rng.gen_range(0.0..=hi) * 10.0).round() / 10.0,
                        None => f64::from(u8::from(rng.gen_bool(0.4))),
                    };
                    (!rng.gen_bool(config.missing_rate)).then_some(value)
                })
                .collect();
            if col.kind == ColumnKind::Qualitative || distinct_observed(&column) >= 3 {
                break column;
            }
        };
        for (row, v) in cells.iter_mut().zip(column) {
            row.push(v);
        }
    }

    let n = columns.len();
    let mut weights = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(n.min(5)) {
        weights[k] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    let scores: Vec<f64> = cells
        .iter()
        .map(|row| {
            let signal: f64 = row
                .iter()
                .zip(&columns)
                .zip(&weights)
                .map(|((v, col), w)| {
                    let scale = col.range.map_or(1.0, |(_, hi)| hi);
                    v.map_or(0.5, |x| x / scale) * w
                })
                .sum();
            signal + rng.gen_range(-0.5..0.5)
        })
        .collect();
    let mut rank: Vec<usize> = (0..config.rows).collect();
    rank.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut labels = vec![false; config.rows];
    for &r in rank.iter().take(config.positives) {
        labels[r] = true;
    }

    let rows = cells.into_iter().zip(labels).map(|(values, label)| RawRow { values, label }).collect();
    let meta = DatasetMeta { label: "survival".into(), missing: "?".into(), columns };
    Ok(RawDataset { meta, rows })
}

fn distinct_observed(column: &[Option<f64>]) -> usize {
    let mut v: Vec<f64> = column.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}
