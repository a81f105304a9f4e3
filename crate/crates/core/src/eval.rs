// SPDX-License-Identifier: Apache-2.0

//! Pairwise disagreement between classifiers on one shared random sample,
//! and the manifest written alongside a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{PartialInterpretation, VariableTable};
use crate::oracles::{GenConfig, MembershipOracle, OracleError, Sampler};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("sample file: {0}")]
    SampleFormat(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub sample_size: u64,
    pub seed: u64,
    /// `"a_b"` for every pair in classifier order, mismatch fraction in `[0, 1]`.
    pub pairs: BTreeMap<String, f64>,
    pub positive_rates: BTreeMap<String, f64>,
}

impl DisagreementReport {
    /// Mismatch fraction between two named classifiers, in either order.
    pub fn fraction(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return self.positive_rates.contains_key(a).then_some(0.0);
        }
        self.pairs.get(&format!("{a}_{b}")).or_else(|| self.pairs.get(&format!("{b}_{a}"))).copied()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text table for the terminal.
    pub fn render_table(&self) -> String {
        let mut out = format!("sample size {}  seed {}\n", self.sample_size, self.seed);
        let width = self.pairs.keys().chain(self.positive_rates.keys()).map(String::len).max().unwrap_or(0).max(4);
        let _ = writeln!(out, "{:<width$}  disagreement", "pair");
        for (k, v) in &self.pairs {
            let _ = writeln!(out, "{k:<width$}  {:>6.2}%", v * 100.0);
        }
        let _ = writeln!(out, "{:<width$}  positive rate", "name");
        for (k, v) in &self.positive_rates {
            let _ = writeln!(out, "{k:<width$}  {:>6.2}%", v * 100.0);
        }
        out
    }
}

/// A sample together with every classifier's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub names: Vec<String>,
    pub xs: Vec<PartialInterpretation>,
    /// `labels[c][k]` is classifier `c`'s answer on `xs[k]`.
    pub labels: Vec<Vec<bool>>,
}

impl LabeledSample {
    /// CSV with columns `x`, then one 0/1 column per classifier.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("x").chain(self.names.iter().map(String::as_str)))?;
        for (k, x) in self.xs.iter().enumerate() {
            let labels = self.labels.iter().map(|l| if l[k] { "1" } else { "0" }.to_string());
            w.write_record(std::iter::once(x.encode()).chain(labels))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<Self, EvalError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("x") {
            return Err(EvalError::SampleFormat("first column must be `x`".into()));
        }
        let names = header[1..].to_vec();
        let mut xs = Vec::new();
        let mut labels = vec![Vec::new(); names.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let bad = |what: &str| EvalError::SampleFormat(format!("line {}: {what}", r + 2));
            let x = PartialInterpretation::decode(&record[0]).map_err(|e| bad(&e.to_string()))?;
            for (c, cell) in record.iter().skip(1).enumerate() {
                labels[c].push(match cell {
                    "1" => true,
                    "0" => false,
                    other => return Err(bad(&format!("label `{other}`"))),
                });
            }
            xs.push(x);
        }
        Ok(Self { names, xs, labels })
    }
}

/// Draws `sample_size` interpretations once and labels them with every classifier.
pub fn label_sample(
    classifiers: &mut [(String, &mut dyn MembershipOracle)],
    table: &VariableTable,
    sample_size: u64,
    gen: GenConfig,
    seed: u64,
    batch_size: usize,
) -> Result<LabeledSample, EvalError> {
    if classifiers.len() < 2 {
        return Err(EvalError::Usage(format!("need at least 2 classifiers, got {}", classifiers.len())));
    }
    for (i, (a, _)) in classifiers.iter().enumerate() {
        if classifiers[..i].iter().any(|(b, _)| a == b) {
            return Err(EvalError::Usage(format!("classifier name `{a}` appears twice")));
        }
    }
    let mut sampler = Sampler::new(gen, seed);
    let xs: Vec<_> = (0..sample_size).map(|_| sampler.draw(table)).collect();
    let mut labels = Vec::with_capacity(classifiers.len());
    for (name, c) in classifiers.iter_mut() {
        let mut ys = Vec::with_capacity(xs.len());
        for chunk in xs.chunks(batch_size.max(1)) {
            let got = c.query_batch(chunk)?;
            if got.len() != chunk.len() {
                return Err(OracleError::Protocol(format!(
                    "`{name}` answered {} of {} queries",
                    got.len(),
                    chunk.len()
                ))
                .into());
            }
            ys.extend(got);
        }
        labels.push(ys);
    }
    Ok(LabeledSample { names: classifiers.iter().map(|(n, _)| n.clone()).collect(), xs, labels })
}

pub fn report_from_sample(sample: &LabeledSample, seed: u64) -> DisagreementReport {
    let n = sample.xs.len();
    let frac = |count: usize| if n == 0 { 0.0 } else { count as f64 / n as f64 };
    let mut pairs = BTreeMap::new();
    for a in 0..sample.names.len() {
        for b in a + 1..sample.names.len() {
            let diff = sample.labels[a].iter().zip(&sample.labels[b]).filter(|(x, y)| x != y).count();
            pairs.insert(format!("{}_{}", sample.names[a], sample.names[b]), frac(diff));
        }
    }
    let positive_rates = sample
        .names
        .iter()
        .zip(&sample.labels)
        .map(|(name, ys)| (name.clone(), frac(ys.iter().filter(|y| **y).count())))
        .collect();
    DisagreementReport { sample_size: n as u64, seed, pairs, positive_rates }
}

/// Labels one shared sample with every classifier and tabulates pairwise disagreement.
pub fn disagreement(
    classifiers: &mut [(String, &mut dyn MembershipOracle)],
    table: &VariableTable,
    sample_size: u64,
    gen: GenConfig,
    seed: u64,
    batch_size: usize,
) -> Result<(DisagreementReport, LabeledSample), EvalError> {
    let sample = label_sample(classifiers, table, sample_size, gen, seed, batch_size)?;
    Ok((report_from_sample(&sample, seed), sample))
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub artifacts: BTreeMap<String, String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub query_counts: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), version: env!("CARGO_PKG_VERSION").into(), ..Self::default() }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
