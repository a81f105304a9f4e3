// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use horn_extract::eval::disagreement;
use horn_extract::learner::{entailment_mq, learn, LearnerConfig, Termination};
use horn_extract::logic::{
    entails, intersect, random_theory, satisfies_partial, satisfies_total, theory_equiv, Equivalence, Head, HornClause,
    HornTheory, IntersectionMode, PartialInterpretation, Side, Truth, Var, VariableTable,
};
use horn_extract::oracles::{
    central_binomial, sample_size, ExactEquivalence, ExactTeacher, GenConfig, MembershipOracle, OracleConfig,
    SampleMode, SampledEquivalence,
};
use horn_extract::pipeline::{
    binarize, build_target, fit_schema, gen_training_set, synth_hcc, CutStrategy, GenDataConfig, SynthConfig,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn table(n: usize) -> VariableTable {
    VariableTable::new((0..n).map(|k| format!("x{k}"))).unwrap()
}

fn bits_of(x: &PartialInterpretation) -> Vec<bool> {
    x.values().iter().map(|t| *t == Truth::True).collect()
}

fn total(bits: &[bool]) -> PartialInterpretation {
    PartialInterpretation::new(bits.iter().map(|b| if *b { Truth::True } else { Truth::False }).collect())
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn exact_recovery() -> Outcome {
    let started = Instant::now();
    let (mut ok, mut max_eq) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..=12);
        let m = rng.gen_range(1..=12);
        let target = random_theory(&mut rng, n, m);
        let mut teacher = ExactTeacher::new(target.clone());
        let mut eq = ExactEquivalence::new(target.clone());
        let config = LearnerConfig { eq_budget: 10_000, ..LearnerConfig::default() };
        let r = learn(&mut teacher, &mut eq, &table(n), &config, |_| {}).map_err(|e| format!("seed {seed}: {e}"))?;
        max_eq = max_eq.max(r.stats.eq_count);
        if r.terminated_by == Termination::EquivalenceYes
            && theory_equiv(&r.hypothesis, &target).unwrap() == Equivalence::Equivalent
            && common::equivalent(&r.hypothesis, &target)
        {
            ok += 1;
        }
    }
    let elapsed = started.elapsed();
    let detail = format!("{ok}/100 equivalent, at most {max_eq} equivalence queries, {}", secs(elapsed));
    if ok == 100 && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// A theory that differs from `t` in a few clauses.
fn perturb(t: &HornTheory, rng: &mut ChaCha8Rng) -> HornTheory {
    let n = t.n_vars();
    let m = rng.gen_range(0..3);
    let extra = random_theory(rng, n, m);
    let kept: Vec<_> =
        t.clauses().iter().filter(|_| rng.gen_bool(0.75)).cloned().chain(extra.clauses().iter().cloned()).collect();
    HornTheory::new(n, kept).unwrap()
}

fn semantics_agree() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e3a);
    let mut mismatches = Vec::new();
    let (mut partials, mut clauses, mut pairs) = (0u64, 0u64, 0u64);
    let check_partials = |t: &HornTheory, mismatches: &mut Vec<String>| {
        let mut count = 0u64;
        for i in common::all_partials(t.n_vars()) {
            count += 1;
            if satisfies_partial(&i, t) != common::sat_partial(&i, t) {
                mismatches.push(format!("satisfies_partial {} on\n{t:?}", i.encode()));
            }
        }
        count
    };
    for k in 0..200 {
        let n = 1 + k % 5;
        let m = rng.gen_range(0..=8);
        let t = random_theory(&mut rng, n, m);
        partials += check_partials(&t, &mut mismatches);
        for c in common::all_clauses(n) {
            clauses += 1;
            if entails(&t, &c) != common::entails(&t, &c) {
                mismatches.push(format!("entails {c:?} on\n{t:?}"));
            }
        }
        let mut others = vec![t.clone(), t.normalized(), random_theory(&mut rng, n, m)];
        others.extend((0..4).map(|_| perturb(&t, &mut rng)));
        for u in &others {
            pairs += 1;
            let truth = common::equivalent(&t, u);
            match theory_equiv(&t, u).unwrap() {
                Equivalence::Equivalent if truth => {}
                Equivalence::Counterexample { interpretation, satisfied_by } if !truth => {
                    let b = bits_of(&interpretation);
                    let (in_t, in_u) = (common::total_model(&b, &t), common::total_model(&b, u));
                    let side = if in_t { Side::First } else { Side::Second };
                    if !interpretation.is_total() || in_t == in_u || satisfied_by != side {
                        mismatches.push(format!("theory_equiv witness {} for\n{t:?}\n{u:?}", interpretation.encode()));
                    }
                }
                verdict => mismatches.push(format!("theory_equiv said {verdict:?} for\n{t:?}\n{u:?}")),
            }
        }
    }
    for k in 0..20 {
        let n = 6 + k % 3;
        let m = rng.gen_range(1..=12);
        partials += check_partials(&random_theory(&mut rng, n, m), &mut mismatches);
    }
    let detail = format!(
        "{} mismatches over {partials} partial assignments, {clauses} clauses, {pairs} theory pairs",
        mismatches.len()
    );
    match mismatches.first() {
        None => Ok(detail),
        Some(first) => Err(format!("{detail}; first: {first}")),
    }
}

/// A model of `t` as the least model above a random set of atoms, if one exists.
fn random_model(t: &HornTheory, rng: &mut ChaCha8Rng) -> Option<Vec<bool>> {
    for _ in 0..20 {
        let density = rng.gen_range(0.0..0.6);
        let facts: Vec<Var> = (0..t.n_vars()).filter(|_| rng.gen_bool(density)).map(Var::from).collect();
        let (closure, bottom) = common::naive_closure(t, &facts);
        if !bottom {
            return Some(closure);
        }
    }
    None
}

fn closure_under_intersection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e);
    let (mut checked, mut violations) = (0, 0);
    while checked < 10_000 {
        let n = rng.gen_range(2..=16);
        let m = rng.gen_range(1..=16);
        let t = random_theory(&mut rng, n, m);
        let (Some(a), Some(b)) = (random_model(&t, &mut rng), random_model(&t, &mut rng)) else { continue };
        let (i, j) = (total(&a), total(&b));
        assert!(satisfies_total(&i, &t).unwrap() && satisfies_total(&j, &t).unwrap());
        let meet = intersect(&i, &j, IntersectionMode::ZeroFill);
        if !(common::total_model(&bits_of(&meet), &t) && satisfies_total(&meet, &t).unwrap()) {
            violations += 1;
        }
        checked += 1;
    }
    let detail = format!("{violations} violations in {checked} triples");
    if violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn entailment_queries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe47a);
    let (mut asked, mut mismatches) = (0u64, 0u64);
    for n in 1..=8 {
        for _ in 0..6 {
            let m = rng.gen_range(0..=2 * n);
            let t = random_theory(&mut rng, n, m);
            let tab = table(n);
            let mut teacher = ExactTeacher::new(t.clone());
            for mask in 0u64..1 << n {
                let alpha: Vec<Var> = (0..n).filter(|k| mask >> k & 1 == 1).map(Var::from).collect();
                let heads = (0..n).filter(|k| mask >> k & 1 == 0).map(|k| Head::Atom(Var::from(k)));
                for v in heads.chain([Head::Bottom]) {
                    asked += 1;
                    let c = HornClause::new(alpha.clone(), v).unwrap();
                    if entailment_mq(&mut teacher, &tab, &alpha, v).unwrap() != common::entails(&t, &c) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let detail = format!("{mismatches} mismatches over {asked} (alpha, v) pairs");
    if mismatches == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest y with y^k <= x.
fn int_root(x: &BigUint, k: u32) -> BigUint {
    let (mut lo, mut hi) = (BigUint::from(0u32), BigUint::from(1u32) << (x.bits() / u64::from(k) + 1));
    while lo < hi {
        let mid: BigUint = (&lo + &hi + 1u32) >> 1;
        if mid.pow(k) <= *x {
            lo = mid;
        } else {
            hi = mid - 1u32;
        }
    }
    lo
}

fn ceil_div(num: &BigUint, den: &BigUint) -> BigUint {
    (num + den - 1u32) / den
}

/// `ceil(10 * (204^2.1 + log2 20))` from rigorous integer brackets:
/// `204^2.1 = (204^21)^(1/10)` via an integer root at 10^-9 resolution and
/// `log2 20` via the bit length of `20^q`.
fn power_size_bracketed() -> (BigUint, BigUint) {
    let scale = BigUint::from(10u32).pow(9);
    let y = int_root(&(BigUint::from(204u32).pow(21) * scale.pow(10)), 10);
    let q = 100_000u32;
    let p = BigUint::from(20u32).pow(q).bits() - 1;
    let q = BigUint::from(q);
    let den = &scale * &q;
    let lower = (&y * &q + BigUint::from(p) * &scale) * 10u32;
    let upper = ((&y + 1u32) * &q + BigUint::from(p + 1) * &scale) * 10u32;
    (ceil_div(&lower, &den), ceil_div(&upper, &den))
}

fn sample_sizes() -> Outcome {
    let got = sample_size(SampleMode::PowerFormula, 0.1, 0.05, 204);
    let (lo, hi) = power_size_bracketed();
    if lo != hi {
        return Err(format!("bracket [{lo}, {hi}] too wide"));
    }
    // independently evaluated at 50 digits: 708353.18394577...
    if BigUint::from(got) != lo || got != 708_354 {
        return Err(format!("power formula gave {got}, expected {lo}"));
    }
    let mut row = vec![1u128];
    for n in 1..=20usize {
        let mut next = vec![1u128; n + 1];
        for k in 1..n {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
        let c = row[n / 2];
        if central_binomial(n) != BigUint::from(c) {
            return Err(format!("C({n},{}) = {c}, library gave {}", n / 2, central_binomial(n)));
        }
        let c = c as u64;
        for (eps, want) in [(0.5, 2 * (c + 1)), (0.25, 4 * (c + 2))] {
            let size = sample_size(SampleMode::BinomialFormula, eps, eps, n);
            if size != want {
                return Err(format!("binomial n={n} eps=delta={eps}: {size}, expected {want}"));
            }
        }
    }
    Ok(format!("power n=204 -> {got}; binomial exact for n = 1..=20"))
}

fn pipeline_arithmetic() -> Outcome {
    let raw = synth_hcc(&SynthConfig::default(), 7).map_err(|e| e.to_string())?;
    let schema = fit_schema(&raw, &CutStrategy::Terciles).map_err(|e| e.to_string())?;
    let tab = schema.table().map_err(|e| e.to_string())?;
    let (base, dual) = (schema.n_base(), tab.len());
    if (raw.rows.len(), base, dual) != (165, 102, 204) {
        return Err(format!("{} rows, {base} base and {dual} dualized variables", raw.rows.len()));
    }
    let rows = binarize(&raw, &schema).map_err(|e| e.to_string())?;
    if rows.iter().any(|r| r.len() != 102) {
        return Err("binarized row of the wrong width".into());
    }
    let target = build_target(&raw, &schema).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set =
        gen_training_set(&target, &tab, 200, 200, &GenDataConfig::default(), &mut rng).map_err(|e| e.to_string())?;
    let pos = set.iter().filter(|e| e.y).count();
    let neg = set.len() - pos;
    let inconsistent = set.iter().filter(|e| common::naive_sat_partial(&e.x, &target) != e.y).count();
    let detail = format!("102/204 variables; {pos} positive, {neg} negative, {inconsistent} mislabelled");
    if (pos, neg, inconsistent) == (200, 200, 0) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn desk_scale() -> Outcome {
    let started = Instant::now();
    let mut rates = Vec::new();
    for seed in 0..20u64 {
        let raw = synth_hcc(&SynthConfig::with_shape(165, 3, 3), seed).map_err(|e| e.to_string())?;
        let schema = fit_schema(&raw, &CutStrategy::Terciles).map_err(|e| e.to_string())?;
        let tab = schema.table().map_err(|e| e.to_string())?;
        assert_eq!(tab.len(), 26);
        let target = build_target(&raw, &schema).map_err(|e| e.to_string())?;
        let oracle =
            OracleConfig { epsilon: 0.1, delta: 0.1, eq_budget: 100, rng_seed: seed, ..OracleConfig::default() };
        let mut eq = SampledEquivalence::new(&oracle, tab.clone()).map_err(|e| e.to_string())?;
        let mut teacher = ExactTeacher::new(target.clone());
        let config = LearnerConfig { eq_budget: 100, ..LearnerConfig::default() };
        let r = learn(&mut teacher, &mut eq, &tab, &config, |_| {}).map_err(|e| e.to_string())?;
        let mut t = ExactTeacher::new(target);
        let mut h = ExactTeacher::new(r.hypothesis);
        let mut pair: Vec<(String, &mut dyn MembershipOracle)> = vec![("t".into(), &mut t), ("h".into(), &mut h)];
        let (report, _) = disagreement(&mut pair, &tab, 10_000, GenConfig::default(), 1_000 + seed, 1024)
            .map_err(|e| e.to_string())?;
        rates.push(report.fraction("t", "h").unwrap());
    }
    let elapsed = started.elapsed();
    let good = rates.iter().filter(|r| **r <= 0.2).count();
    let worst = rates.iter().copied().fold(0.0, f64::max);
    let detail = format!("t_h <= 0.2 in {good}/20 seeds (worst {:.2}%), {}", 100.0 * worst, secs(elapsed));
    if good >= 18 && elapsed < Duration::from_secs(600) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(dir: &Path) -> Result<Vec<(&'static str, Vec<u8>)>, String> {
    let steps: &[&[&str]] = &[
        &[
            "synth-hcc",
            "--seed",
            "3",
            "--rows",
            "165",
            "--quantitative",
            "3",
            "--qualitative",
            "3",
            "--out",
            "raw.csv",
            "--meta",
            "meta.json",
        ],
        &[
            "binarize",
            "--input",
            "raw.csv",
            "--meta",
            "meta.json",
            "--out-schema",
            "schema.json",
            "--out-data",
            "bin.csv",
        ],
        &["build-target", "--data", "bin.csv", "--schema", "schema.json", "--out", "target.rules"],
        &[
            "learn",
            "--teacher",
            "exact:target.rules",
            "--seed",
            "4",
            "--delta",
            "0.1",
            "--out",
            "h.rules",
            "--trace",
            "trace.jsonl",
        ],
        &["eval", "--classifiers", "t=target.rules,h=h.rules", "--seed", "5", "--out", "report.json"],
    ];
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_hornx")).current_dir(dir).args(*args).output().unwrap();
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr).trim()));
        }
    }
    ["h.rules", "trace.jsonl", "report.json"]
        .into_iter()
        .map(|f| fs::read(dir.join(f)).map(|b| (f, b)).map_err(|e| format!("{f}: {e}")))
        .collect()
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (first, second) = (run_cli(a.path())?, run_cli(b.path())?);
    let differing: Vec<_> = first.iter().zip(&second).filter(|(x, y)| x != y).map(|(x, _)| x.0).collect();
    if differing.is_empty() {
        let sizes: Vec<_> = first.iter().map(|(f, b)| format!("{f} {}B", b.len())).collect();
        Ok(format!("identical across two runs: {}", sizes.join(", ")))
    } else {
        Err(format!("differs between runs: {}", differing.join(", ")))
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact-oracle recovery", exact_recovery),
        ("semantics match brute force", semantics_agree),
        ("models closed under intersection", closure_under_intersection),
        ("entailment by membership queries", entailment_queries),
        ("sample-size formulas", sample_sizes),
        ("pipeline arithmetic", pipeline_arithmetic),
        ("desk-scale end to end", desk_scale),
        ("CLI determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", 8 - failed, 8);
    if failed > 0 {
        std::process::exit(1);
    }
}
