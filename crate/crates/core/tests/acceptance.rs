//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its key numbers (run with `--nocapture` to see them).
//!
//! Everything that can be checked exactly is checked exactly: certificates,
//! duality, label invariance, aggregation inequalities, and the fixed effect
//! values. The Monte Carlo criteria use fixed seeds and generous tolerances.

use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plurality::{
    aggregation_report, build_dual, build_primal, build_weighted_plurality, canonical_labels,
    decide, decide_with_labels, effect_scaling_experiment, effect_vector, random_neutral_function,
    solve, verify_weights, verify_witness, Alternative, Distribution, EffectMethod, EffectValue,
    ExplicitDistribution, Labels, Mode, ProductDistribution, Profile, Rational, ScalingFamily,
    SocialChoiceFunction, TieBreakRule, Verdict, WeightVector,
};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn dictator(k: u32, n: usize) -> SocialChoiceFunction {
    let mut weights = vec![Rational::zero(); n];
    weights[0] = Rational::one();
    build_weighted_plurality(
        k,
        n,
        &WeightVector::new(weights).unwrap(),
        TieBreakRule::FirstMatchingVoter,
    )
    .unwrap()
}

fn parity(n: usize) -> SocialChoiceFunction {
    let table = (0..(1usize << n))
        .map(|idx: usize| Alternative(idx.count_ones() % 2))
        .collect();
    SocialChoiceFunction::new(2, n, table).unwrap()
}

fn plurality(k: u32, n: usize) -> SocialChoiceFunction {
    build_weighted_plurality(
        k,
        n,
        &WeightVector::uniform(n),
        TieBreakRule::FirstMatchingVoter,
    )
    .unwrap()
}

/// 204 random neutral functions over k in {2,3}, n in {2,3,4}; the verdict's
/// certificate must pass its exact verifier every single time.
#[test]
fn criterion_1_self_certifying_decisions() {
    let start = Instant::now();
    let mut decided = 0u32;
    for (k, n) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
        for seed in 0..34 {
            let f = random_neutral_function(k, n, seed).unwrap();
            let outcome = decide(&f, Mode::Neutral).unwrap();
            match outcome.verdict {
                Verdict::IsWeightedPlurality => {
                    let w = outcome.weights.as_ref().expect("weights present");
                    assert!(outcome.witness.is_none());
                    assert!(
                        verify_weights(&f, w),
                        "k={k} n={n} seed={seed}: weights failed verification"
                    );
                    assert!(!outcome.optimum.is_negative());
                }
                Verdict::NotWeightedPlurality => {
                    let witness = outcome.witness.as_ref().expect("witness present");
                    assert!(outcome.weights.is_none());
                    assert!(
                        verify_witness(&f, witness, outcome.labels),
                        "k={k} n={n} seed={seed}: witness failed verification"
                    );
                    assert!(outcome.optimum.is_negative());
                }
            }
            decided += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(decided, 204);
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget is 2 minutes");
    println!(
        "criterion 1 (self-certifying decisions): PASS: {decided}/{decided} certificates verified in {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Known instances decide exactly as derived by hand.
#[test]
fn criterion_2_known_instances() {
    for n in [3, 5] {
        let f = parity(n);
        let outcome = decide(&f, Mode::Neutral).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotWeightedPlurality, "parity n={n}");
        let witness = outcome.witness.expect("witness present");
        assert!(verify_witness(&f, &witness, outcome.labels));
    }

    for (k, n) in [(2, 3), (3, 2), (3, 4), (4, 2)] {
        let f = dictator(k, n);
        let outcome = decide(&f, Mode::Neutral).unwrap();
        assert_eq!(outcome.verdict, Verdict::IsWeightedPlurality, "dictator k={k} n={n}");
        assert_eq!(outcome.optimum, Rational::one(), "dictator optimum is exactly 1");
    }

    for n in [2, 3, 4] {
        let f = plurality(3, n);
        let outcome = decide(&f, Mode::Neutral).unwrap();
        assert_eq!(outcome.verdict, Verdict::IsWeightedPlurality, "plurality n={n}");
    }

    let f = build_weighted_plurality(
        2,
        4,
        &WeightVector::uniform(4),
        TieBreakRule::FixedWinner(Alternative(1)),
    )
    .unwrap();
    let outcome = decide(&f, Mode::General).unwrap();
    assert_eq!(outcome.verdict, Verdict::IsWeightedPlurality);

    println!(
        "criterion 2 (known instances): PASS: parity rejected (n=3,5), dictator optimum 1, \
         plurality and fixed-winner majority accepted"
    );
}

/// Independently solving the primal and the dual yields exactly equal
/// optima on every instance from criteria 1 and 2.
#[test]
fn criterion_3_strong_duality() {
    let start = Instant::now();
    let mut instances: Vec<(SocialChoiceFunction, Vec<Labels>)> = Vec::new();
    for (k, n) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
        for seed in 0..34 {
            let f = random_neutral_function(k, n, seed).unwrap();
            let labels = canonical_labels(k);
            instances.push((f, vec![labels]));
        }
    }
    for n in [3, 5] {
        instances.push((parity(n), vec![canonical_labels(2)]));
    }
    for (k, n) in [(2, 3), (3, 2), (3, 4), (4, 2)] {
        instances.push((dictator(k, n), vec![canonical_labels(k)]));
    }
    for n in [2, 3, 4] {
        instances.push((plurality(3, n), vec![canonical_labels(3)]));
    }
    let fixed = build_weighted_plurality(
        2,
        4,
        &WeightVector::uniform(4),
        TieBreakRule::FixedWinner(Alternative(1)),
    )
    .unwrap();
    instances.push((
        fixed,
        vec![
            Labels::new(Alternative(1), Alternative(0)),
            Labels::new(Alternative(0), Alternative(1)),
        ],
    ));

    let mut checked = 0u32;
    for (f, label_list) in &instances {
        for &labels in label_list {
            let primal = build_primal(f, labels).unwrap();
            let t = solve(&primal.lp).unwrap();
            let t = t.as_optimal().expect("primal is feasible and bounded");

            let dual = build_dual(f, labels).unwrap();
            let d = solve(&dual.lp).unwrap();
            let d = d.as_optimal().expect("dual is feasible and bounded");

            assert_eq!(
                t.objective,
                dual.printed_optimum(d),
                "duality gap on k={} n={}",
                f.k(),
                f.n()
            );
            checked += 1;
        }
    }
    println!(
        "criterion 3 (strong duality): PASS: t* = a* exactly on {checked} instances in {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// For neutral functions the verdict does not depend on the label pair.
#[test]
fn criterion_4_label_invariance() {
    let mut checked = 0u32;
    for seed in 1000..1020 {
        let f = random_neutral_function(3, 3, seed).unwrap();
        let verdicts: Vec<Verdict> = (0..3)
            .cartesian_product(0..3)
            .filter(|(a, b)| a != b)
            .map(|(a, b)| {
                decide_with_labels(&f, Labels::new(Alternative(a), Alternative(b)))
                    .unwrap()
                    .verdict
            })
            .collect();
        assert_eq!(verdicts.len(), 6);
        assert!(
            verdicts.iter().all(|v| *v == verdicts[0]),
            "seed {seed}: verdicts differ across label pairs: {verdicts:?}"
        );
        checked += 1;
    }
    println!(
        "criterion 4 (label invariance): PASS: {checked} functions, identical verdicts on all 6 ordered pairs"
    );
}

/// 100 random (weighted plurality, product distribution, set A) triples with
/// realized positive gap: the exact chain delta * P(f not in A) <= cov_sum
/// holds every time, and the effect bound holds whenever all per-pair
/// covariances are nonnegative.
#[test]
fn criterion_5_aggregation_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_da66);
    let k = 3u32;
    let subsets: [&[u32]; 6] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2]];

    let mut collected = 0u32;
    let mut effect_checked = 0u32;
    let mut attempts = 0u32;
    while collected < 100 {
        attempts += 1;
        assert!(attempts < 5000, "positive-gap instances should be plentiful");
        let n = rng.gen_range(2..=5usize);

        let mut parts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=6)).collect();
        if parts.iter().all(|&v| v == 0) {
            parts[0] = 1;
        }
        let total: i64 = parts.iter().sum();
        let w = WeightVector::new(parts.iter().map(|&v| r(v, total)).collect()).unwrap();
        let f = build_weighted_plurality(k, n, &w, TieBreakRule::FirstMatchingVoter).unwrap();

        let set_a: Vec<Alternative> = subsets[rng.gen_range(0..subsets.len())]
            .iter()
            .map(|&v| Alternative(v))
            .collect();
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let parts: Vec<i64> = (0..k)
                    .map(|j| {
                        if set_a.iter().any(|a| a.value() == j) {
                            rng.gen_range(4..=9)
                        } else {
                            rng.gen_range(1..=3)
                        }
                    })
                    .collect();
                let total: i64 = parts.iter().sum();
                parts.into_iter().map(|v| r(v, total)).collect()
            })
            .collect();
        let dist: Distribution = ProductDistribution::new(rows).unwrap().into();

        let report = aggregation_report(&f, &w, &dist, &set_a).unwrap();
        if !report.delta.is_positive() {
            continue;
        }
        assert_eq!(
            report.delta_chain_holds,
            Some(true),
            "delta chain failed at attempt {attempts}"
        );
        assert!(&report.delta * &report.p_not_a <= report.cov_sum);
        if report.all_covariances_nonnegative {
            assert_eq!(
                report.effect_chain_holds,
                Some(true),
                "effect bound failed despite nonnegative covariances"
            );
            effect_checked += 1;
        }
        collected += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget is 2 minutes");
    println!(
        "criterion 5 (aggregation inequality): PASS: 100/100 positive-gap triples satisfied the chain \
         ({effect_checked} also met the effect bound) in {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Fixed effect values, exact and with zero tolerance: a deterministic
/// common vote gives every voter effect exactly 1; coordinates a function
/// ignores have effect exactly 0 under a product measure.
#[test]
fn criterion_6_fixed_effect_values() {
    for k in [2u32, 3] {
        for common in [0, k - 1] {
            let f = plurality(k, 3);
            let all_equal: Distribution =
                ExplicitDistribution::point_mass(Profile::new(vec![Alternative(common); 3]))
                    .into();
            let effects = effect_vector(&f, &all_equal, EffectMethod::Exact).unwrap();
            for value in &effects.values {
                let EffectValue::Exact(e) = value else { panic!("exact run") };
                assert_eq!(e, &Rational::one(), "k={k}, common vote {common}");
            }
        }
    }

    let f = dictator(2, 4);
    let uniform: Distribution = ProductDistribution::uniform(2, 4).into();
    let effects = effect_vector(&f, &uniform, EffectMethod::Exact).unwrap();
    for (i, value) in effects.values.iter().enumerate().skip(1) {
        let EffectValue::Exact(e) = value else { panic!("exact run") };
        assert!(e.is_zero(), "ignored coordinate {i} must have zero effect");
    }

    let constant = SocialChoiceFunction::new(3, 3, vec![Alternative(2); 27]).unwrap();
    let uniform3: Distribution = ProductDistribution::uniform(3, 3).into();
    let effects = effect_vector(&constant, &uniform3, EffectMethod::Exact).unwrap();
    for value in &effects.values {
        let EffectValue::Exact(e) = value else { panic!("exact run") };
        assert!(e.is_zero());
    }

    println!(
        "criterion 6 (fixed effect values): PASS: deterministic common vote gives e_i = 1 exactly, \
         ignored coordinates give e_i = 0 exactly"
    );
}

/// Desk-scale decay rates for the unweighted plurality: the uniform family
/// scales like 1/sqrt(n) (within a factor of 3 across a 9x size change) and
/// the biased family decays much faster than that.
#[test]
fn criterion_7_effect_decay() {
    let start = Instant::now();
    let samples = 1_000_000u64;

    let uniform = effect_scaling_experiment(3, &ScalingFamily::Uniform, &[9, 81], samples, 20260810);
    let scaled_small = uniform[0].estimate * 3.0; // sqrt(9)
    let scaled_large = uniform[1].estimate * 9.0; // sqrt(81)
    let ratio = scaled_large / scaled_small;
    assert!(
        (1.0 / 3.0..=3.0).contains(&ratio),
        "sqrt(n)-scaled estimates differ by more than 3x: {scaled_small} vs {scaled_large}"
    );

    let biased = effect_scaling_experiment(
        3,
        &ScalingFamily::Biased { delta: 0.3 },
        &[20, 80],
        samples,
        20260810,
    );
    assert!(
        biased[1].estimate < biased[0].estimate / 4.0,
        "biased family decayed too slowly: e(20) = {}, e(80) = {}",
        biased[0].estimate,
        biased[1].estimate
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 180, "took {elapsed:?}, budget is 3 minutes");
    println!(
        "criterion 7 (effect decay): PASS: sqrt(n) ratio {ratio:.3} in [1/3, 3]; \
         biased e(80)/e(20) = {:.4} < 1/4; {:.1}s",
        biased[1].estimate / biased[0].estimate,
        elapsed.as_secs_f64()
    );
}

/// Monte Carlo effect estimates agree with exact values to within four
/// standard errors on at least 95% of voter coordinates.
#[test]
fn criterion_8_exact_vs_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc8c8);
    let mut within = 0u32;
    let mut coordinates = 0u32;
    for instance in 0..20 {
        let (k, n) = if instance % 2 == 0 { (2u32, 5usize) } else { (3u32, 4usize) };
        let f = random_neutral_function(k, n, 7000 + instance).unwrap();
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let parts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
                let total: i64 = parts.iter().sum();
                parts.into_iter().map(|v| r(v, total)).collect()
            })
            .collect();
        let dist: Distribution = ProductDistribution::new(rows).unwrap().into();

        let exact = effect_vector(&f, &dist, EffectMethod::Exact).unwrap();
        let sampled = effect_vector(
            &f,
            &dist,
            EffectMethod::MonteCarlo {
                samples: 100_000,
                seed: 31_000 + instance,
            },
        )
        .unwrap();
        for (e, s) in exact.values.iter().zip(&sampled.values) {
            let EffectValue::Exact(e) = e else { panic!("exact run") };
            let EffectValue::Estimate { value, std_err } = s else { panic!("sampled run") };
            coordinates += 1;
            if (value - e.to_f64()).abs() <= 4.0 * std_err {
                within += 1;
            }
        }
    }
    let fraction = within as f64 / coordinates as f64;
    assert!(
        fraction >= 0.95,
        "only {within}/{coordinates} coordinates within 4 standard errors"
    );
    println!(
        "criterion 8 (exact vs sampled): PASS: {within}/{coordinates} coordinates within 4 SE \
         ({:.1}%)",
        fraction * 100.0
    );
}

/// The generator-based neutrality check agrees with brute force over all k!
/// permutations; at k=2, n=3 exactly the 16 anti-symmetric functions pass.
#[test]
fn criterion_9_neutrality_oracle_equivalence() {
    // Independent oracle: try every permutation on every profile.
    fn digits(mut idx: usize, k: u32, n: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push((idx % k as usize) as u32);
            idx /= k as usize;
        }
        out
    }
    fn brute_force_neutral(f: &SocialChoiceFunction) -> bool {
        let k = f.k();
        let n = f.n();
        let size = f.table_len();
        (0..k).permutations(k as usize).all(|perm| {
            (0..size).all(|idx| {
                let image_idx = digits(idx, k, n)
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &d| acc * k as usize + perm[d as usize] as usize);
                f.value_at(image_idx).value() == perm[f.value_at(idx).index()]
            })
        })
    }

    // Every one of the 256 functions on {0,1}^3; exactly 16 are neutral.
    let mut neutral_count = 0u32;
    for code in 0..256usize {
        let table = (0..8).map(|i| Alternative(((code >> i) & 1) as u32)).collect();
        let f = SocialChoiceFunction::new(2, 3, table).unwrap();
        let fast = f.is_neutral().is_neutral();
        assert_eq!(fast, brute_force_neutral(&f), "disagreement at code {code}");
        if fast {
            neutral_count += 1;
        }
    }
    assert_eq!(neutral_count, 16);

    // 100 random functions at k=3, n=3.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let table = (0..27).map(|_| Alternative(rng.gen_range(0..3))).collect();
        let f = SocialChoiceFunction::new(3, 3, table).unwrap();
        assert_eq!(f.is_neutral().is_neutral(), brute_force_neutral(&f));
    }

    // All 24 permutations at k=4, on random and on orbit-built functions.
    for seed in 0..10 {
        let table = (0..16).map(|_| Alternative(rng.gen_range(0..4))).collect();
        let f = SocialChoiceFunction::new(4, 2, table).unwrap();
        assert_eq!(f.is_neutral().is_neutral(), brute_force_neutral(&f));
        let g = random_neutral_function(4, 2, seed).unwrap();
        assert!(g.is_neutral().is_neutral());
        assert!(brute_force_neutral(&g));
    }

    println!(
        "criterion 9 (neutrality oracle): PASS: all 256 binary functions (16 neutral), \
         100 random ternary functions, and 20 quaternary functions agree with the k! oracle"
    );
}
