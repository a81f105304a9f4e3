// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LogicError, Var};

/// A tri-valued truth assignment for one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Truth {
    False,
    True,
    Unknown,
}

impl Truth {
    pub fn to_char(self) -> char {
        match self {
            Truth::False => '0',
            Truth::True => '1',
            Truth::Unknown => '?',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Truth::False),
            '1' => Some(Truth::True),
            '?' => Some(Truth::Unknown),
            _ => None,
        }
    }
}

/// How positions that are not true in both operands are filled by [`intersect`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionMode {
    /// Everything outside the shared true-set becomes 0.
    #[default]
    ZeroFill,
    /// Shared 0s stay 0; positions where the operands differ become `?`.
    PreserveUnknown,
}

impl FromStr for IntersectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero_fill" | "zero-fill" => Ok(Self::ZeroFill),
            "preserve_unknown" | "preserve-unknown" => Ok(Self::PreserveUnknown),
            other => Err(format!("unknown intersection mode `{other}`")),
        }
    }
}

/// Assignment of `{0, 1, ?}` to every variable of a table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialInterpretation {
    values: Vec<Truth>,
}

impl PartialInterpretation {
    pub fn new(values: Vec<Truth>) -> Self {
        Self { values }
    }

    pub fn filled(n: usize, value: Truth) -> Self {
        Self { values: vec![value; n] }
    }

    pub fn unknown(n: usize) -> Self {
        Self::filled(n, Truth::Unknown)
    }

    /// Total interpretation whose true-set is `trues`.
    pub fn from_true_set(n: usize, trues: impl IntoIterator<Item = Var>) -> Self {
        let mut i = Self::filled(n, Truth::False);
        for v in trues {
            i.values[v.index()] = Truth::True;
        }
        i
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: Var) -> Truth {
        self.values[v.index()]
    }

    pub fn set(&mut self, v: Var, value: Truth) {
        self.values[v.index()] = value;
    }

    pub fn values(&self) -> &[Truth] {
        &self.values
    }

    pub fn is_total(&self) -> bool {
        !self.values.contains(&Truth::Unknown)
    }

    pub fn is_true(&self, v: Var) -> bool {
        self.values[v.index()] == Truth::True
    }

    /// Variables mapped to 1, in index order.
    pub fn true_set(&self) -> Vec<Var> {
        self.with_value(Truth::True)
    }

    pub fn with_value(&self, value: Truth) -> Vec<Var> {
        self.values.iter().enumerate().filter(|(_, t)| **t == value).map(|(i, _)| Var::from(i)).collect()
    }

    pub fn count(&self, value: Truth) -> usize {
        self.values.iter().filter(|t| **t == value).count()
    }

    /// Wire encoding: one character per variable over `0`, `1`, `?`.
    pub fn encode(&self) -> String {
        self.values.iter().map(|t| t.to_char()).collect()
    }

    pub fn decode(s: &str) -> Result<Self, LogicError> {
        s.chars()
            .enumerate()
            .map(|(pos, c)| Truth::from_char(c).ok_or(LogicError::BadEncoding { pos, found: c }))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl fmt::Display for PartialInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Meet of two partial interpretations over the same table.
///
/// The true-set of the result is always the intersection of the operands'
/// true-sets; `mode` decides what the remaining positions hold.
pub fn intersect(
    i: &PartialInterpretation,
    j: &PartialInterpretation,
    mode: IntersectionMode,
) -> PartialInterpretation {
    assert_eq!(i.len(), j.len(), "intersecting interpretations of different width");
    let values = i
        .values
        .iter()
        .zip(&j.values)
        .map(|(a, b)| match (a, b, mode) {
            (Truth::True, Truth::True, _) => Truth::True,
            (_, _, IntersectionMode::ZeroFill) => Truth::False,
            (Truth::False, Truth::False, IntersectionMode::PreserveUnknown) => Truth::False,
            (_, _, IntersectionMode::PreserveUnknown) => Truth::Unknown,
        })
        .collect();
    PartialInterpretation { values }
}
