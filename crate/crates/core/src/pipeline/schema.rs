// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::dataset::{ColumnKind, RawDataset, RawRow};
use super::PipelineError;
use crate::logic::{PartialInterpretation, Truth, Var, VariableTable};

pub const BIN_SUFFIXES: [&str; 3] = ["_low", "_mid", "_high"];

/// How quantitative features are cut into low/mid/high.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum CutStrategy {
    #[default]
    Terciles,
    /// Cuts keyed by column name; unlisted columns fall back to terciles.
    Explicit(BTreeMap<String, (f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bins {
    /// low = [min, c1], mid = (c1, c2], high = (c2, max].
    Quantitative {
        range: (f64, f64),
        cuts: (f64, f64),
    },
    Qualitative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub column: String,
    /// Variable name (or name stem for quantitative features).
    pub var: String,
    #[serde(flatten)]
    pub bins: Bins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarizationSchema {
    pub features: Vec<FeatureSchema>,
    pub label_column: String,
    pub label_var: String,
}

/// Replaces characters outside `[A-Za-z0-9_.]` with `_` and prefixes `_`
/// when the name does not start with a letter or underscore.
pub fn sanitize(name: &str) -> String {
    let mut s: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' }).collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        s.insert(0, '_');
    }
    s
}

/// Cut-points at the empirical 1/3 and 2/3 quantiles (inverse empirical
/// CDF), moved to midpoints between distinct values when that is needed to
/// keep `min < c1 < c2 < max`.
pub fn tercile_cuts(values: &[f64], range: (f64, f64)) -> Option<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return None;
    }
    let cuts = (v[n.div_ceil(3) - 1], v[(2 * n).div_ceil(3) - 1]);
    if strictly_inside(cuts, range) {
        return Some(cuts);
    }
    v.dedup();
    let k = v.len();
    if k < 3 {
        return None;
    }
    let (i1, i2) = (k.div_ceil(3), (2 * k).div_ceil(3));
    let cuts = ((v[i1 - 1] + v[i1]) / 2.0, (v[i2 - 1] + v[i2]) / 2.0);
    strictly_inside(cuts, range).then_some(cuts)
}

fn strictly_inside((c1, c2): (f64, f64), (lo, hi): (f64, f64)) -> bool {
    lo < c1 && c1 < c2 && c2 < hi
}

fn distinct(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

pub fn fit_schema(raw: &RawDataset, strategy: &CutStrategy) -> Result<BinarizationSchema, PipelineError> {
    let explicit = match strategy {
        CutStrategy::Terciles => None,
        CutStrategy::Explicit(m) => Some(m),
    };
    if let Some(m) = explicit {
        for name in m.keys() {
            if !raw.meta.columns.iter().any(|c| c.name == *name && c.kind == ColumnKind::Quantitative) {
                return Err(PipelineError::Cuts(format!("`{name}` is not a quantitative column")));
            }
        }
    }
    let mut features = Vec::with_capacity(raw.n_features());
    for (k, col) in raw.meta.columns.iter().enumerate() {
        let var = sanitize(&col.name);
        let bins = match col.kind {
            ColumnKind::Qualitative => Bins::Qualitative,
            ColumnKind::Quantitative => {
                let observed: Vec<f64> = raw.observed(k).collect();
                let range = match col.range {
                    Some(r) => r,
                    None if observed.is_empty() => return Err(PipelineError::Degenerate(col.name.clone())),
                    None => observed.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x))),
                };
                if range.0.partial_cmp(&range.1).is_none_or(|o| o.is_gt()) {
                    return Err(PipelineError::Cuts(format!("`{}` has empty range {:?}", col.name, range)));
                }
                let cuts = match explicit.and_then(|m| m.get(&col.name)) {
                    Some(&cuts) if strictly_inside(cuts, range) => cuts,
                    Some(&cuts) => {
                        return Err(PipelineError::Cuts(format!(
                            "cuts {cuts:?} for `{}` are not strictly inside {range:?}",
                            col.name
                        )))
                    }
                    None if distinct(&observed) < 3 => return Err(PipelineError::Degenerate(col.name.clone())),
                    None => {
                        tercile_cuts(&observed, range).ok_or_else(|| PipelineError::Degenerate(col.name.clone()))?
                    }
                };
                Bins::Quantitative { range, cuts }
            }
        };
        features.push(FeatureSchema { column: col.name.clone(), var, bins });
    }
    let schema =
        BinarizationSchema { features, label_column: raw.meta.label.clone(), label_var: sanitize(&raw.meta.label) };
    schema.table()?;
    Ok(schema)
}

impl BinarizationSchema {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Variable names before dualization: bins, qualitative features, label.
    pub fn base_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for f in &self.features {
            match f.bins {
                Bins::Quantitative { .. } => names.extend(BIN_SUFFIXES.iter().map(|s| format!("{}{s}", f.var))),
                Bins::Qualitative => names.push(f.var.clone()),
            }
        }
        names.push(self.label_var.clone());
        names
    }

    pub fn n_base(&self) -> usize {
        self.features.iter().map(|f| if matches!(f.bins, Bins::Quantitative { .. }) { 3 } else { 1 }).sum::<usize>() + 1
    }

    /// The dualized table: base names, then `not_` + base names.
    pub fn table(&self) -> Result<VariableTable, PipelineError> {
        Ok(VariableTable::dualized(&self.base_names())?)
    }

    /// Position of the label variable (in both the base and dualized tables).
    pub fn label(&self) -> Var {
        Var::from(self.n_base() - 1)
    }

    fn check_columns(&self, raw: &RawDataset) -> Result<(), PipelineError> {
        let cols: Vec<&str> = raw.meta.columns.iter().map(|c| c.name.as_str()).collect();
        let ours: Vec<&str> = self.features.iter().map(|f| f.column.as_str()).collect();
        if cols != ours || raw.meta.label != self.label_column {
            return Err(PipelineError::Schema("dataset columns do not match the schema".into()));
        }
        Ok(())
    }
}

/// Binarizes one row over the base (pre-dualization) variables.
pub fn binarize_row(row: &RawRow, schema: &BinarizationSchema) -> PartialInterpretation {
    let mut out = Vec::with_capacity(schema.n_base());
    for (f, value) in schema.features.iter().zip(&row.values) {
        match (&f.bins, value) {
            (Bins::Qualitative, None) => out.push(Truth::Unknown),
            (Bins::Qualitative, Some(x)) => out.push(if *x != 0.0 { Truth::True } else { Truth::False }),
            (Bins::Quantitative { .. }, None) => out.extend([Truth::Unknown; 3]),
            (Bins::Quantitative { range, cuts }, Some(x)) => {
                if *x < range.0 || *x > range.1 {
                    warn!("value {x} of `{}` outside {range:?}; clamped", f.column);
                }
                let bin = if *x <= cuts.0 {
                    0
                } else if *x <= cuts.1 {
                    1
                } else {
                    2
                };
                out.extend((0..3).map(|b| if b == bin { Truth::True } else { Truth::False }));
            }
        }
    }
    out.push(if row.label { Truth::True } else { Truth::False });
    PartialInterpretation::new(out)
}

pub fn binarize(raw: &RawDataset, schema: &BinarizationSchema) -> Result<Vec<PartialInterpretation>, PipelineError> {
    schema.check_columns(raw)?;
    Ok(raw.rows.iter().map(|r| binarize_row(r, schema)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::dataset::{ColumnMeta, DatasetMeta};

    fn dataset(kind: ColumnKind, range: Option<(f64, f64)>, values: &[Option<f64>]) -> RawDataset {
        RawDataset {
            meta: DatasetMeta {
                label: "class".into(),
                missing: "?".into(),
                columns: vec![ColumnMeta { name: "x".into(), kind, range }],
            },
            rows: values.iter().map(|v| RawRow { values: vec![*v], label: true }).collect(),
        }
    }

    fn cuts_of(s: &BinarizationSchema) -> (f64, f64) {
        match s.features[0].bins {
            Bins::Quantitative { cuts, .. } => cuts,
            Bins::Qualitative => panic!(),
        }
    }

    #[test]
    fn terciles_of_one_to_nine() {
        let values: Vec<_> = (1..=9).map(|v| Some(v as f64)).collect();
        let d = dataset(ColumnKind::Quantitative, None, &values);
        let s = fit_schema(&d, &CutStrategy::Terciles).unwrap();
        assert_eq!(cuts_of(&s), (3.0, 6.0));
        let bins: Vec<String> = binarize(&d, &s).unwrap().iter().map(|i| i.encode()).collect();
        assert_eq!(bins.iter().filter(|b| b.starts_with("100")).count(), 3);
        assert_eq!(bins.iter().filter(|b| b.starts_with("010")).count(), 3);
        assert_eq!(bins.iter().filter(|b| b.starts_with("001")).count(), 3);
    }

    #[test]
    fn skewed_values_fall_back_to_distinct_midpoints() {
        let values: Vec<_> = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0].map(Some).to_vec();
        let d = dataset(ColumnKind::Quantitative, None, &values);
        assert_eq!(cuts_of(&fit_schema(&d, &CutStrategy::Terciles).unwrap()), (0.5, 1.5));
    }

    #[test]
    fn degenerate_columns() {
        let d = dataset(ColumnKind::Quantitative, None, &[Some(4.0), Some(4.0), None]);
        assert!(matches!(fit_schema(&d, &CutStrategy::Terciles), Err(PipelineError::Degenerate(_))));
        let d = dataset(ColumnKind::Quantitative, None, &[Some(1.0), Some(2.0), Some(1.0)]);
        assert!(matches!(fit_schema(&d, &CutStrategy::Terciles), Err(PipelineError::Degenerate(_))));
        // explicit cuts rescue a constant column
        let d = dataset(ColumnKind::Quantitative, Some((0.0, 10.0)), &[Some(4.0), Some(4.0)]);
        let cuts = CutStrategy::Explicit([("x".to_string(), (3.0, 5.0))].into());
        assert!(fit_schema(&d, &cuts).is_ok());
    }

    #[test]
    fn explicit_cuts_and_boundaries() {
        let values = [Some(51.0), None, Some(50.0), Some(200.0), Some(200.5), Some(600.0), Some(-1.0)];
        let d = dataset(ColumnKind::Quantitative, Some((0.0, 510.0)), &values);
        let cuts = CutStrategy::Explicit([("x".to_string(), (50.0, 200.0))].into());
        let s = fit_schema(&d, &cuts).unwrap();
        let got: Vec<String> = binarize(&d, &s).unwrap().iter().map(|i| i.encode()).collect();
        assert_eq!(got, ["0101", "???1", "1001", "0101", "0011", "0011", "1001"]);

        let bad = CutStrategy::Explicit([("x".to_string(), (0.0, 200.0))].into());
        assert!(matches!(fit_schema(&d, &bad), Err(PipelineError::Cuts(_))));
        let unknown = CutStrategy::Explicit([("nope".to_string(), (1.0, 2.0))].into());
        assert!(matches!(fit_schema(&d, &unknown), Err(PipelineError::Cuts(_))));
    }

    #[test]
    fn qualitative_copies_through() {
        let d = dataset(ColumnKind::Qualitative, None, &[Some(1.0), Some(0.0), None]);
        let s = fit_schema(&d, &CutStrategy::Terciles).unwrap();
        assert_eq!(s.base_names(), ["x", "class"]);
        let got: Vec<String> = binarize(&d, &s).unwrap().iter().map(|i| i.encode()).collect();
        assert_eq!(got, ["11", "01", "?1"]);
    }

    #[test]
    fn names_and_json() {
        assert_eq!(sanitize("iron (mg/dl)"), "iron__mg_dl_");
        assert_eq!(sanitize("1st"), "_1st");
        let values: Vec<_> = (1..=9).map(|v| Some(v as f64)).collect();
        let d = dataset(ColumnKind::Quantitative, None, &values);
        let s = fit_schema(&d, &CutStrategy::Terciles).unwrap();
        assert_eq!(
            s.table().unwrap().names(),
            ["x_low", "x_mid", "x_high", "class", "not_x_low", "not_x_mid", "not_x_high", "not_class"]
        );
        assert_eq!(BinarizationSchema::from_json(&s.to_json()).unwrap(), s);
        assert_eq!(s.label(), Var(3));
    }
}
