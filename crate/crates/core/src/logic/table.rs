// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LogicError;

/// Prefix carried by the name of every dual (weakly negated) variable.
pub const DUAL_PREFIX: &str = "not_";

/// Index of a propositional variable; also its position in the vector encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Var {
    fn from(i: usize) -> Self {
        Var(i as u32)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Returns true if `name` matches `[A-Za-z_][A-Za-z0-9_.]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Ordered set of variable names with an optional symmetric dual pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableTable {
    names: Vec<String>,
    lookup: HashMap<String, Var>,
    dual_of: Vec<Option<Var>>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    names: Vec<String>,
    #[serde(default)]
    duals: Vec<[String; 2]>,
}

impl VariableTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, LogicError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(LogicError::InvalidName(name.clone()));
            }
            if lookup.insert(name.clone(), Var::from(i)).is_some() {
                return Err(LogicError::DuplicateName(name.clone()));
            }
        }
        let dual_of = vec![None; names.len()];
        Ok(Self { names, lookup, dual_of })
    }

    /// Table over `base` followed by `not_<name>` for every base name, each
    /// base variable paired with its dual.
    pub fn dualized<S: AsRef<str>>(base: &[S]) -> Result<Self, LogicError> {
        let names = base
            .iter()
            .map(|s| s.as_ref().to_string())
            .chain(base.iter().map(|s| format!("{DUAL_PREFIX}{}", s.as_ref())));
        let mut table = Self::new(names)?;
        let k = base.len();
        for i in 0..k {
            table.pair(Var::from(i), Var::from(i + k))?;
        }
        Ok(table)
    }

    /// Declare `a` and `b` as each other's dual.
    pub fn pair(&mut self, a: Var, b: Var) -> Result<(), LogicError> {
        if a == b {
            return Err(LogicError::SelfDual(self.name(a).to_string()));
        }
        for v in [a, b] {
            if v.index() >= self.len() {
                return Err(LogicError::VarOutOfRange(v.0, self.len()));
            }
        }
        for (v, w) in [(a, b), (b, a)] {
            if let Some(existing) = self.dual_of[v.index()] {
                if existing != w {
                    return Err(LogicError::ConflictingDual(self.name(v).to_string()));
                }
            }
        }
        self.dual_of[a.index()] = Some(b);
        self.dual_of[b.index()] = Some(a);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.lookup.get(name).copied()
    }

    pub fn dual_of(&self, v: Var) -> Option<Var> {
        self.dual_of[v.index()]
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.names.len()).map(Var::from)
    }

    /// Every dual pair once, as `(v, w)` with `v < w`.
    pub fn dual_pairs(&self) -> Vec<(Var, Var)> {
        self.vars().filter_map(|v| self.dual_of(v).filter(|w| v < *w).map(|w| (v, w))).collect()
    }

    /// Builds a table from names in first-appearance order, pairing `x` with
    /// `not_x` whenever both are present.
    pub fn infer_from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, LogicError> {
        let mut table = Self::new(names.iter().map(|s| s.as_ref().to_string()))?;
        for v in 0..table.len() {
            let name = table.names[v].clone();
            if let Some(base) = name.strip_prefix(DUAL_PREFIX) {
                if let Some(b) = table.var(base) {
                    table.pair(b, Var::from(v))?;
                }
            }
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            names: self.names.clone(),
            duals: self
                .dual_pairs()
                .into_iter()
                .map(|(a, b)| [self.name(a).to_string(), self.name(b).to_string()])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LogicError> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| LogicError::TableFormat(e.to_string()))?;
        let mut table = Self::new(file.names)?;
        for [a, b] in file.duals {
            let va = table.var(&a).ok_or_else(|| LogicError::UnknownVariable(a.clone()))?;
            let vb = table.var(&b).ok_or_else(|| LogicError::UnknownVariable(b.clone()))?;
            table.pair(va, vb)?;
        }
        Ok(table)
    }
}
