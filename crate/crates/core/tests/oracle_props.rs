// SPDX-License-Identifier: Apache-2.0

mod common;

use horn_extract::logic::{random_theory, satisfies_partial, HornTheory, Truth, VariableTable};
use horn_extract::oracles::{
    eq_sampled, sample_size, Caching, Counting, EqAnswer, ExactTeacher, GenConfig, GenProbs, MembershipOracle,
    SampleMode, Sampler, Sign,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(n: usize) -> VariableTable {
    VariableTable::new((0..n).map(|k| format!("x{k}"))).unwrap()
}

/// A theory close to `t`: a few clauses dropped, a few random ones added.
fn perturb<R: Rng>(t: &HornTheory, rng: &mut R) -> HornTheory {
    let n = t.n_vars();
    let extra = {
        let m = rng.gen_range(0..3);
        random_theory(rng, n, m)
    };
    let kept = t.clauses().iter().filter(|_| rng.gen_bool(0.8)).cloned().chain(extra.clauses().iter().cloned());
    HornTheory::new(n, kept.collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sampled_counterexamples_are_real_disagreements(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = { let m = rng.gen_range(0..6); random_theory(&mut rng, n, m) };
        let h = perturb(&t, &mut rng);
        let mut teacher = ExactTeacher::new(t.clone());
        let mut sampler = Sampler::new(GenConfig::default(), seed);
        if let EqAnswer::Counterexample(ce) = eq_sampled(&h, &mut teacher, &mut sampler, &table(n), 300, 32).unwrap() {
            let in_t = common::sat_partial(&ce.interpretation, &t);
            let in_h = common::sat_partial(&ce.interpretation, &h);
            prop_assert_ne!(in_t, in_h);
            prop_assert_eq!(ce.sign, if in_t { Sign::Positive } else { Sign::Negative });
        }
    }

    #[test]
    fn identical_hypothesis_is_never_refuted(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = { let m = rng.gen_range(0..8); random_theory(&mut rng, n, m) };
        let mut teacher = ExactTeacher::new(t.clone());
        let mut sampler = Sampler::new(GenConfig::default(), seed);
        prop_assert_eq!(eq_sampled(&t, &mut teacher, &mut sampler, &table(n), 2000, 256).unwrap(), EqAnswer::Yes);
    }

    #[test]
    fn sample_size_grows_with_precision_confidence_and_width(
        eps in 0.01f64..0.5, delta in 0.01f64..0.5, n in 1usize..150, binomial in any::<bool>()
    ) {
        let mode = if binomial { SampleMode::BinomialFormula } else { SampleMode::PowerFormula };
        let s = sample_size(mode, eps, delta, n);
        prop_assert!(sample_size(mode, eps / 2.0, delta, n) >= s);
        prop_assert!(sample_size(mode, eps, delta / 2.0, n) >= s);
        prop_assert!(sample_size(mode, eps, delta, n + 1) >= s);
        prop_assert!(s as f64 >= (1.0 / delta).log2() / eps);
    }

    #[test]
    fn wrappers_do_not_change_answers(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_theory(&mut rng, n, 4);
        let mut sampler = Sampler::new(GenConfig::default(), seed);
        let xs: Vec<_> = (0..40).map(|_| sampler.draw(&table(n))).collect();
        let expected: Vec<bool> = xs.iter().map(|x| satisfies_partial(x, &t)).collect();
        let mut wrapped = Counting::new(Caching::new(ExactTeacher::new(t.clone())));
        prop_assert_eq!(wrapped.query_batch(&xs).unwrap(), expected.clone());
        let singles: Vec<bool> = xs.iter().map(|x| wrapped.query(x).unwrap()).collect();
        prop_assert_eq!(singles, expected);
        prop_assert_eq!(wrapped.stats().mq_count, 80);
    }
}

/// When the sampled oracle says yes, the hypothesis' true error under the
/// sampling distribution (uniform over total interpretations here) exceeds
/// epsilon in at most a delta fraction of trials, up to 3 sigma.
#[test]
fn sampled_yes_is_probably_approximately_correct() {
    let (eps, delta, trials) = (0.1, 0.05, 200u32);
    let gen = GenConfig { probs: GenProbs::new(0.5, 0.5, 0.0).unwrap(), respect_duals: false };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut accepted, mut bad) = (0u32, 0u32);
    for trial in 0..trials {
        let n = rng.gen_range(3..=10);
        let t = {
            let m = rng.gen_range(1..8);
            random_theory(&mut rng, n, m)
        };
        // mostly near misses, whose error can sit on either side of epsilon
        let h = perturb(&t, &mut rng);
        let mut teacher = ExactTeacher::new(t.clone());
        let mut sampler = Sampler::new(gen, u64::from(trial));
        let s = sample_size(SampleMode::PowerFormula, eps, delta, n);
        if eq_sampled(&h, &mut teacher, &mut sampler, &table(n), s, 512).unwrap() == EqAnswer::Yes {
            accepted += 1;
            let wrong =
                common::all_totals(n).filter(|b| common::total_model(b, &t) != common::total_model(b, &h)).count();
            if wrong as f64 / f64::from(1u32 << n) > eps {
                bad += 1;
            }
        }
    }
    let mean = delta * f64::from(trials);
    let allowed = mean + 3.0 * (mean * (1.0 - delta)).sqrt();
    assert!(accepted > 0);
    assert!(f64::from(bad) <= allowed, "{bad} of {trials} accepted hypotheses were more than {eps} wrong");
}

#[test]
fn uniform_totals_have_no_unknowns() {
    let gen = GenConfig { probs: GenProbs::new(0.5, 0.5, 0.0).unwrap(), respect_duals: false };
    let mut s = Sampler::new(gen, 1);
    for _ in 0..100 {
        assert_eq!(s.draw(&table(12)).count(Truth::Unknown), 0);
    }
}
