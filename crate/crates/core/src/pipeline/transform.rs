// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};

use super::dataset::RawDataset;
use super::schema::{binarize, BinarizationSchema};
use super::PipelineError;
use crate::logic::{Head, HornClause, HornTheory, PartialInterpretation, Truth, Var, VariableTable};

/// Appends the dual block: `not_v = 1 - v` for known `v`, `?` otherwise.
pub fn dualize(i: &PartialInterpretation) -> PartialInterpretation {
    let flip = |t: &Truth| match t {
        Truth::True => Truth::False,
        Truth::False => Truth::True,
        Truth::Unknown => Truth::Unknown,
    };
    let values = i.values().iter().copied().chain(i.values().iter().map(flip)).collect();
    PartialInterpretation::new(values)
}

/// The first `n_base` positions of a dualized interpretation.
pub fn project(i: &PartialInterpretation, n_base: usize) -> PartialInterpretation {
    PartialInterpretation::new(i.values()[..n_base].to_vec())
}

/// `(v ∧ not_v) → ⊥` for every dual pair of the table.
pub fn disjointness_clauses(table: &VariableTable) -> Vec<HornClause> {
    table.dual_pairs().into_iter().map(|(v, w)| HornClause::new([v, w], Head::Bottom).expect("distinct pair")).collect()
}

pub fn is_disjointness(clause: &HornClause, table: &VariableTable) -> bool {
    match (clause.antecedent(), clause.consequent()) {
        ([v, w], Head::Bottom) => table.dual_of(*v) == Some(*w),
        _ => false,
    }
}

/// The rule read off one dualized row: every true non-label variable implies
/// the label (or its dual when the label is 0). Unknown positions are dropped.
pub fn row_to_rule(x: &PartialInterpretation, label: Var, table: &VariableTable) -> Result<HornClause, PipelineError> {
    let not_label = table.dual_of(label).ok_or(PipelineError::LabelWithoutDual)?;
    let head = match x.get(label) {
        Truth::True => Head::Atom(label),
        Truth::False => Head::Atom(not_label),
        Truth::Unknown => return Err(PipelineError::MissingLabel),
    };
    let antecedent = x.true_set().into_iter().filter(|v| *v != label && *v != not_label);
    Ok(HornClause::new(antecedent, head)?)
}

/// Row rules of every example plus the disjointness clauses, normalized.
pub fn target_from_rows(
    rows: &[PartialInterpretation],
    label: Var,
    table: &VariableTable,
) -> Result<HornTheory, PipelineError> {
    let mut t = HornTheory::empty(table.len());
    for x in rows {
        if x.len() != table.len() {
            return Err(PipelineError::Width { expected: table.len(), found: x.len() });
        }
        t.push(row_to_rule(x, label, table)?)?;
    }
    for c in disjointness_clauses(table) {
        t.push(c)?;
    }
    Ok(t.normalized())
}

pub fn build_target(raw: &RawDataset, schema: &BinarizationSchema) -> Result<HornTheory, PipelineError> {
    let table = schema.table()?;
    let rows: Vec<_> = binarize(raw, schema)?.iter().map(dualize).collect();
    target_from_rows(&rows, schema.label(), &table)
}

/// Writes interpretations as CSV over `{0,1,?}` with the table's names as header.
pub fn write_interpretations(
    writer: impl Write,
    table: &VariableTable,
    rows: &[PartialInterpretation],
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.names())?;
    let mut buf = [0u8; 4];
    for x in rows {
        w.write_record(x.values().iter().map(|t| t.to_char().encode_utf8(&mut buf).as_bytes().to_vec()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `{0,1,?}` CSV; returns the header and one interpretation per row.
pub fn read_interpretations(reader: impl Read) -> Result<(Vec<String>, Vec<PartialInterpretation>), PipelineError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let mut values = Vec::with_capacity(header.len());
        for (cell, name) in record.iter().zip(&header) {
            let t = match cell {
                "0" => Truth::False,
                "1" => Truth::True,
                "?" => Truth::Unknown,
                _ => return Err(PipelineError::Value { line: r + 2, column: name.clone(), value: cell.into() }),
            };
            values.push(t);
        }
        rows.push(PartialInterpretation::new(values));
    }
    Ok((header, rows))
}
