// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::io::{Read, Write};

use log::warn;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Quantitative,
    Qualitative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    /// Declared `[min, max]`; inferred from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
}

fn default_missing() -> String {
    "?".into()
}

/// Sidecar metadata for a raw CSV file. `columns` lists the features only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub label: String,
    #[serde(default = "default_missing")]
    pub missing: String,
    pub columns: Vec<ColumnMeta>,
}

impl DatasetMeta {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Meta(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    /// One entry per feature column, `None` when missing.
    pub values: Vec<Option<f64>>,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub meta: DatasetMeta,
    pub rows: Vec<RawRow>,
}

impl RawDataset {
    pub fn n_features(&self) -> usize {
        self.meta.columns.len()
    }

    /// Non-missing values of feature `k`.
    pub fn observed(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().filter_map(move |r| r.values[k])
    }

    /// Fraction of feature cells that are missing.
    pub fn missing_rate(&self) -> f64 {
        let cells = self.rows.len() * self.n_features();
        if cells == 0 {
            return 0.0;
        }
        let missing: usize = self.rows.iter().map(|r| r.values.iter().filter(|v| v.is_none()).count()).sum();
        missing as f64 / cells as f64
    }

    /// Reads a CSV with a header row. Columns not declared in `meta` are
    /// skipped with a warning.
    pub fn read_csv(reader: impl Read, meta: DatasetMeta) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let position: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
        let find = |name: &str| {
            position.get(name).copied().ok_or_else(|| PipelineError::Meta(format!("column `{name}` not in CSV header")))
        };
        let label_at = find(&meta.label)?;
        let feature_at = meta.columns.iter().map(|c| find(&c.name)).collect::<Result<Vec<_>, _>>()?;
        for h in &header {
            if *h != meta.label && !meta.columns.iter().any(|c| c.name == *h) {
                warn!("ignoring undeclared column `{h}`");
            }
        }
        let mut rows = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let line = r + 2;
            let cell = |i: usize| record.get(i).unwrap_or("");
            let label = match cell(label_at) {
                "1" => true,
                "0" => false,
                other => return Err(PipelineError::Value { line, column: meta.label.clone(), value: other.into() }),
            };
            let mut values = Vec::with_capacity(feature_at.len());
            for (col, &i) in meta.columns.iter().zip(&feature_at) {
                let raw = cell(i);
                let bad = || PipelineError::Value { line, column: col.name.clone(), value: raw.into() };
                if raw == meta.missing {
                    values.push(None);
                    continue;
                }
                let x: f64 = raw.parse().map_err(|_| bad())?;
                if !x.is_finite() || (col.kind == ColumnKind::Qualitative && x != 0.0 && x != 1.0) {
                    return Err(bad());
                }
                values.push(Some(x));
            }
            rows.push(RawRow { values, label });
        }
        Ok(Self { meta, rows })
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.meta.columns.iter().map(|c| c.name.as_str()).collect();
        header.push(&self.meta.label);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> =
                row.values.iter().map(|v| v.map_or_else(|| self.meta.missing.clone(), |x| x.to_string())).collect();
            rec.push(if row.label { "1" } else { "0" }.into());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
