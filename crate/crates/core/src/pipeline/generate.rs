// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use super::transform::is_disjointness;
use super::PipelineError;
use crate::logic::{satisfies_partial, Head, HornClause, HornTheory, PartialInterpretation, Truth, VariableTable};
use crate::oracles::{gen_random_partial, GenConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub x: PartialInterpretation,
    pub y: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenDataConfig {
    pub gen: GenConfig,
    /// Consecutive failed draws tolerated before giving up on one example.
    pub max_attempts: u64,
}

impl Default for GenDataConfig {
    fn default() -> Self {
        Self { gen: GenConfig { respect_duals: true, ..GenConfig::default() }, max_attempts: 100_000 }
    }
}

fn negative_draw<R: Rng + ?Sized>(
    clause: &HornClause,
    table: &VariableTable,
    gen: &GenConfig,
    rng: &mut R,
) -> PartialInterpretation {
    let mut x = gen_random_partial(gen, table, rng);
    for &a in clause.antecedent() {
        x.set(a, Truth::True);
    }
    if gen.respect_duals {
        for &a in clause.antecedent() {
            if let Some(d) = table.dual_of(a).filter(|d| clause.antecedent().binary_search(d).is_err()) {
                x.set(d, Truth::False);
            }
        }
    }
    if let Head::Atom(u) = clause.consequent() {
        x.set(u, Truth::False);
        if let Some(d) = table.dual_of(u) {
            x.set(d, Truth::True);
        }
    }
    x
}

/// Draws `n_pos` interpretations satisfying `target` and `n_neg` falsifying
/// it, shuffled together.
///
/// Positives come from rejection sampling. Each negative starts from a random
/// non-disjointness clause (any clause if there are no others), forces its
/// antecedent true and its consequent false (its dual true), and is
/// re-checked against the target.
pub fn gen_training_set<R: Rng + ?Sized>(
    target: &HornTheory,
    table: &VariableTable,
    n_pos: usize,
    n_neg: usize,
    config: &GenDataConfig,
    rng: &mut R,
) -> Result<Vec<LabeledExample>, PipelineError> {
    if target.n_vars() != table.len() {
        return Err(PipelineError::Width { expected: table.len(), found: target.n_vars() });
    }
    config.gen.probs.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(n_pos + n_neg);

    for _ in 0..n_pos {
        let mut attempts = 0;
        loop {
            if attempts == config.max_attempts {
                return Err(PipelineError::Stall { label: "positive", attempts });
            }
            attempts += 1;
            let x = gen_random_partial(&config.gen, table, rng);
            if satisfies_partial(&x, target) {
                out.push(LabeledExample { x, y: true });
                break;
            }
        }
    }

    let mut pool: Vec<&HornClause> = target.clauses().iter().filter(|c| !is_disjointness(c, table)).collect();
    if pool.is_empty() {
        pool = target.clauses().iter().collect();
    }
    for _ in 0..n_neg {
        if pool.is_empty() {
            return Err(PipelineError::Stall { label: "negative", attempts: 0 });
        }
        let mut attempts = 0;
        loop {
            if attempts == config.max_attempts {
                return Err(PipelineError::Stall { label: "negative", attempts });
            }
            attempts += 1;
            let clause = pool[rng.gen_range(0..pool.len())];
            let x = negative_draw(clause, table, &config.gen, rng);
            if !satisfies_partial(&x, target) {
                out.push(LabeledExample { x, y: false });
                break;
            }
        }
    }

    out.shuffle(rng);
    Ok(out)
}

/// Writes examples as CSV: one column per variable, then `y`.
pub fn write_training_set(
    writer: impl Write,
    table: &VariableTable,
    examples: &[LabeledExample],
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.names().iter().map(String::as_str).chain(["y"]))?;
    for e in examples {
        let cells = e.x.values().iter().map(|t| t.to_char().to_string()).chain([u8::from(e.y).to_string()]);
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a training set; the last column is the label.
pub fn read_training_set(reader: impl Read) -> Result<(Vec<String>, Vec<LabeledExample>), PipelineError> {
    let (mut names, rows) = super::transform::read_interpretations(reader)?;
    if names.pop().is_none() {
        return Err(PipelineError::Config("training set has no columns".into()));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (r, x) in rows.into_iter().enumerate() {
        let mut values = x.values().to_vec();
        let y = match values.pop() {
            Some(Truth::True) => true,
            Some(Truth::False) => false,
            other => {
                return Err(PipelineError::Value {
                    line: r + 2,
                    column: "y".into(),
                    value: other.map(|t| t.to_char().to_string()).unwrap_or_default(),
                })
            }
        };
        out.push(LabeledExample { x: PartialInterpretation::new(values), y });
    }
    Ok((names, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_rules;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (VariableTable, HornTheory) {
        let table = VariableTable::dualized(&["a", "b", "label"]).unwrap();
        let t = parse_rules(
            "a & not_b -> label\nnot_a -> not_label\na & not_a -> false\nb & not_b -> false\nlabel & not_label -> false\n",
            &table,
        )
        .unwrap();
        (table, t)
    }

    #[test]
    fn balanced_and_consistent() {
        let (table, t) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = gen_training_set(&t, &table, 40, 30, &GenDataConfig::default(), &mut rng).unwrap();
        assert_eq!(set.iter().filter(|e| e.y).count(), 40);
        assert_eq!(set.iter().filter(|e| !e.y).count(), 30);
        for e in &set {
            assert_eq!(satisfies_partial(&e.x, &t), e.y);
            for (v, w) in table.dual_pairs() {
                assert!(!(e.x.is_true(v) && e.x.is_true(w)));
            }
        }
    }

    #[test]
    fn empty_requests_and_stalls() {
        let (table, t) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gen_training_set(&t, &table, 0, 0, &GenDataConfig::default(), &mut rng).unwrap().is_empty());
        let empty = HornTheory::empty(table.len());
        let err = gen_training_set(&empty, &table, 0, 1, &GenDataConfig::default(), &mut rng).unwrap_err();
        assert!(matches!(err, PipelineError::Stall { label: "negative", .. }));
        let everything_false = parse_rules("true -> false\n", &table).unwrap();
        let config = GenDataConfig { max_attempts: 50, ..GenDataConfig::default() };
        let err = gen_training_set(&everything_false, &table, 1, 0, &config, &mut rng).unwrap_err();
        assert!(matches!(err, PipelineError::Stall { label: "positive", attempts: 50 }));
    }

    #[test]
    fn same_seed_same_set() {
        let (table, t) = setup();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            gen_training_set(&t, &table, 10, 10, &GenDataConfig::default(), &mut rng).unwrap()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn csv_round_trip() {
        let (table, t) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = gen_training_set(&t, &table, 5, 5, &GenDataConfig::default(), &mut rng).unwrap();
        let mut out = Vec::new();
        write_training_set(&mut out, &table, &set).unwrap();
        let (names, back) = read_training_set(out.as_slice()).unwrap();
        assert_eq!(names, table.names());
        assert_eq!(back, set);
    }
}
