// SPDX-License-Identifier: Apache-2.0

use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::OracleError;
use crate::logic::{PartialInterpretation, Truth, VariableTable};

/// Which hypothesis-space estimate drives the equivalence sample size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `log2 |H| = C(n, floor(n/2))`, the Horn-function count estimate.
    BinomialFormula,
    /// `log2 |H| = n^2.1`, tractable at a few hundred variables.
    #[default]
    PowerFormula,
}

impl FromStr for SampleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binomial" | "binomial_formula" => Ok(Self::BinomialFormula),
            "power" | "power_formula" => Ok(Self::PowerFormula),
            other => Err(format!("unknown sample mode `{other}` (expected power or binomial)")),
        }
    }
}

/// Per-variable probabilities of drawing 0, 1 and `?`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenProbs {
    pub p0: f64,
    pub p1: f64,
    pub p_unknown: f64,
}

impl Default for GenProbs {
    fn default() -> Self {
        Self { p0: 1.0 / 3.0, p1: 1.0 / 3.0, p_unknown: 1.0 / 3.0 }
    }
}

impl GenProbs {
    pub fn new(p0: f64, p1: f64, p_unknown: f64) -> Result<Self, OracleError> {
        let g = Self { p0, p1, p_unknown };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let ps = [self.p0, self.p1, self.p_unknown];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(OracleError::Config(format!("generation probabilities {ps:?} must lie in [0,1]")));
        }
        if (ps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(OracleError::Config(format!("generation probabilities {ps:?} must sum to 1")));
        }
        Ok(())
    }
}

/// How random partial interpretations are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub probs: GenProbs,
    /// Never draw a variable and its dual both true.
    pub respect_duals: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub sample_mode: SampleMode,
    pub eq_budget: u32,
    pub rng_seed: u64,
    #[serde(flatten)]
    pub gen: GenConfig,
    /// Forces the per-query sample size instead of the formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_override: Option<u64>,
    /// Membership queries per batched exchange with the teacher.
    pub batch_size: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            delta: 0.05,
            sample_mode: SampleMode::PowerFormula,
            eq_budget: 100,
            rng_seed: 0,
            gen: GenConfig::default(),
            sample_override: None,
            batch_size: 256,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(OracleError::Config(format!("epsilon {} must lie in (0,1)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(OracleError::Config(format!("delta {} must lie in (0,1)", self.delta)));
        }
        if self.eq_budget < 1 {
            return Err(OracleError::Config("eq_budget must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(OracleError::Config("batch_size must be at least 1".into()));
        }
        self.gen.probs.validate()
    }

    /// Samples per equivalence query: the override if set, else [`sample_size`].
    pub fn samples_per_query(&self, n_vars: usize) -> u64 {
        self.sample_override.unwrap_or_else(|| sample_size(self.sample_mode, self.epsilon, self.delta, n_vars))
    }
}

/// `C(n, floor(n/2))` exactly.
pub fn central_binomial(n: usize) -> BigUint {
    let k = n / 2;
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `log2 |H|` under the given estimate.
pub fn log2_hypothesis_count(mode: SampleMode, n_vars: usize) -> f64 {
    let n = n_vars as f64;
    match mode {
        SampleMode::PowerFormula => n.powf(2.1),
        SampleMode::BinomialFormula if n_vars <= 64 => {
            let c = central_binomial(n_vars);
            // every C(n, n/2) with n <= 64 is below 2^64
            u64::try_from(&c).expect("central binomial fits u64 for n <= 64") as f64
        }
        SampleMode::BinomialFormula => {
            let k = (n_vars / 2) as f64;
            let log2_c = (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / std::f64::consts::LN_2;
            log2_c.exp2()
        }
    }
}

/// Base-2 logarithm of the sample size, finite where the size itself overflows.
pub fn sample_size_log2(mode: SampleMode, epsilon: f64, delta: f64, n_vars: usize) -> f64 {
    let log2_inv_delta = -delta.log2();
    let n = n_vars as f64;
    let log2_h = match mode {
        SampleMode::PowerFormula => 2.1 * n.log2(),
        SampleMode::BinomialFormula if n_vars <= 64 => log2_hypothesis_count(mode, n_vars).log2(),
        SampleMode::BinomialFormula => {
            let k = (n_vars / 2) as f64;
            (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / std::f64::consts::LN_2
        }
    };
    // log2(2^a + b) for a possibly huge
    let log2_sum = if log2_h > 60.0 {
        log2_h + (1.0 + log2_inv_delta / log2_h.exp2()).log2()
    } else {
        (log2_h.exp2() + log2_inv_delta).log2()
    };
    log2_sum - epsilon.log2()
}

/// `ceil((1/epsilon) * (log2|H| + log2(1/delta)))`, saturating at `u64::MAX`.
pub fn sample_size(mode: SampleMode, epsilon: f64, delta: f64, n_vars: usize) -> u64 {
    assert!(n_vars >= 1, "sample size needs at least one variable");
    if sample_size_log2(mode, epsilon, delta, n_vars) >= 64.0 {
        return u64::MAX;
    }
    let log2_h = log2_hypothesis_count(mode, n_vars);
    let value = (log2_h + (1.0 / delta).log2()) / epsilon;
    if value >= u64::MAX as f64 {
        u64::MAX
    } else {
        value.ceil() as u64
    }
}

fn draw<R: Rng + ?Sized>(probs: &GenProbs, rng: &mut R) -> Truth {
    let u: f64 = rng.gen();
    if u < probs.p0 {
        Truth::False
    } else if u < probs.p0 + probs.p1 {
        Truth::True
    } else {
        Truth::Unknown
    }
}

/// Draws one random partial interpretation over `table`.
///
/// With `respect_duals`, each dual pair is drawn jointly from
/// `{(1,0), (0,1), (?,?), (0,0)}` weighted by the independent-draw
/// probabilities of those outcomes, renormalized.
pub fn gen_random_partial<R: Rng + ?Sized>(
    gen: &GenConfig,
    table: &VariableTable,
    rng: &mut R,
) -> PartialInterpretation {
    let n = table.len();
    let mut values = Vec::with_capacity(n);
    let p = &gen.probs;
    let weights = [p.p1 * p.p0, p.p0 * p.p1, p.p_unknown * p.p_unknown, p.p0 * p.p0];
    let total: f64 = weights.iter().sum();
    for v in table.vars() {
        let dual = if gen.respect_duals { table.dual_of(v) } else { None };
        match dual {
            // paired variables are drawn jointly below
            Some(_) => values.push(Truth::Unknown),
            None => values.push(draw(p, rng)),
        }
    }
    if gen.respect_duals {
        for (v, w) in table.dual_pairs() {
            let outcome = if total > 0.0 {
                let mut u = rng.gen::<f64>() * total;
                let mut pick = 3;
                for (k, wt) in weights.iter().enumerate() {
                    if u < *wt {
                        pick = k;
                        break;
                    }
                    u -= wt;
                }
                pick
            } else {
                rng.gen_range(0..2)
            };
            let (a, b) = match outcome {
                0 => (Truth::True, Truth::False),
                1 => (Truth::False, Truth::True),
                2 => (Truth::Unknown, Truth::Unknown),
                _ => (Truth::False, Truth::False),
            };
            values[v.index()] = a;
            values[w.index()] = b;
        }
    }
    PartialInterpretation::new(values)
}

/// Seeded stream of random partial interpretations.
#[derive(Clone, Debug)]
pub struct Sampler {
    gen: GenConfig,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(gen: GenConfig, seed: u64) -> Self {
        Self { gen, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn gen_config(&self) -> &GenConfig {
        &self.gen
    }

    pub fn draw(&mut self, table: &VariableTable) -> PartialInterpretation {
        gen_random_partial(&self.gen, table, &mut self.rng)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
