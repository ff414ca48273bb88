//! Voter effects, outcome covariances, and aggregation reports.
//!
//! The effect of voter `i` under a distribution `P` is
//! `e_i = sum_j [P(f=j | X_i=j) - P(f=j | X_i != j)]`, summed over all `k`
//! alternatives. Zero-probability conditioning is resolved as follows: an
//! alternative the voter never votes (`P(X_i = j) = 0`) contributes nothing
//! to the sum, and when the voter votes `j` almost surely (`P(X_i != j) = 0`)
//! the vacuous disagreement conditional counts as 0. This keeps every effect
//! finite, makes perfectly correlated voters under a deterministic common
//! vote have effect exactly 1, and preserves the per-voter covariance bound
//! `e_i >= 4 * sum_j Cov(1{f=j}, 1{X_i=j})` whenever those covariances are
//! all nonnegative.
//!
//! Exact computations enumerate profiles in rational arithmetic; Monte Carlo
//! estimates use one stratified sample stream and report standard errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dist::{DistError, Distribution};
use crate::decide::verify_weights;
use crate::rational::Rational;
use crate::scf::{Alternative, ScfError, SocialChoiceFunction, MAX_TABLE_SIZE};
use crate::weights::WeightVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EffectsError {
    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error("the supplied weights do not make the function a weighted plurality")]
    NotAWeightedPlurality,
    #[error("invalid alternative set: {0}")]
    InvalidSet(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Scf(#[from] ScfError),
}

/// How to compute an effect vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectMethod {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// One per-voter effect, exact or estimated.
#[derive(Debug, Clone, PartialEq)]
pub enum EffectValue {
    Exact(Rational),
    Estimate { value: f64, std_err: f64 },
}

/// Per-voter effects plus the method that produced them.
///
/// Serializes as `{"method":"exact","values":["2",...]}` or
/// `{"method":"monte-carlo","samples":N,"seed":S,"values":[{"estimate":...,
/// "stderr":...},...]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectVector {
    pub method: EffectMethod,
    pub values: Vec<EffectValue>,
}

impl Serialize for EffectVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.method {
            EffectMethod::Exact => {
                let values: Vec<&Rational> = self
                    .values
                    .iter()
                    .map(|v| match v {
                        EffectValue::Exact(r) => r,
                        EffectValue::Estimate { .. } => {
                            unreachable!("exact vectors hold exact values")
                        }
                    })
                    .collect();
                let mut st = serializer.serialize_struct("EffectVector", 2)?;
                st.serialize_field("method", "exact")?;
                st.serialize_field("values", &values)?;
                st.end()
            }
            EffectMethod::MonteCarlo { samples, seed } => {
                #[derive(Serialize)]
                struct Entry {
                    estimate: f64,
                    stderr: f64,
                }
                let values: Vec<Entry> = self
                    .values
                    .iter()
                    .map(|v| match v {
                        EffectValue::Estimate { value, std_err } => Entry {
                            estimate: *value,
                            stderr: *std_err,
                        },
                        EffectValue::Exact(_) => {
                            unreachable!("monte-carlo vectors hold estimates")
                        }
                    })
                    .collect();
                let mut st = serializer.serialize_struct("EffectVector", 4)?;
                st.serialize_field("method", "monte-carlo")?;
                st.serialize_field("samples", &samples)?;
                st.serialize_field("seed", &seed)?;
                st.serialize_field("values", &values)?;
                st.end()
            }
        }
    }
}

/// Joint outcome statistics gathered in one exact enumeration pass:
/// `margins[i][j] = P(X_i = j)`, `joint[i][j] = P(f(X) = j, X_i = j)`,
/// `totals[j] = P(f(X) = j)`.
struct JointStats {
    margins: Vec<Vec<Rational>>,
    joint: Vec<Vec<Rational>>,
    totals: Vec<Rational>,
}

fn joint_stats(f: &SocialChoiceFunction, dist: &Distribution) -> Result<JointStats, EffectsError> {
    let n = f.n();
    let k = f.k() as usize;
    if dist.n() != n {
        return Err(EffectsError::DimensionMismatch(format!(
            "distribution over {} voters, function takes {n}",
            dist.n()
        )));
    }
    let mut joint = vec![vec![Rational::zero(); k]; n];
    let mut totals = vec![Rational::zero(); k];

    match dist {
        Distribution::Product(p) => {
            if p.k() != f.k() {
                return Err(EffectsError::DimensionMismatch(format!(
                    "product rows over [{}], function over [{}]",
                    p.k(),
                    f.k()
                )));
            }
            if f.table_len() > MAX_TABLE_SIZE {
                return Err(EffectsError::TooLarge(format!(
                    "k^n = {} exceeds {MAX_TABLE_SIZE}",
                    f.table_len()
                )));
            }
            let rows = p.rows();
            let mut counter = crate::scf::ProfileCounter::new(f.k(), n);
            let mut idx = 0usize;
            loop {
                let mut prob = Rational::one();
                for (i, &d) in counter.digits().iter().enumerate() {
                    prob *= &rows[i][d as usize];
                    if prob.is_zero() {
                        break;
                    }
                }
                if !prob.is_zero() {
                    let a = f.value_at(idx);
                    for (i, &d) in counter.digits().iter().enumerate() {
                        if d == a.value() {
                            joint[i][a.index()] += &prob;
                        }
                    }
                    totals[a.index()] += prob;
                }
                idx += 1;
                if !counter.advance() {
                    break;
                }
            }
            let margins = rows.to_vec();
            Ok(JointStats {
                margins,
                joint,
                totals,
            })
        }
        Distribution::Explicit(e) => {
            let mut margins = vec![vec![Rational::zero(); k]; n];
            for (x, prob) in e.support() {
                let a = f.evaluate(x)?;
                for (i, &vote) in x.entries().iter().enumerate() {
                    margins[i][vote.index()] += prob;
                    if vote == a {
                        joint[i][a.index()] += prob;
                    }
                }
                totals[a.index()] += prob;
            }
            Ok(JointStats {
                margins,
                joint,
                totals,
            })
        }
    }
}

fn exact_effects_from_stats(stats: &JointStats) -> Vec<Rational> {
    let one = Rational::one();
    stats
        .margins
        .iter()
        .zip(&stats.joint)
        .map(|(margin_row, joint_row)| {
            let mut effect = Rational::zero();
            for j in 0..margin_row.len() {
                let m = &margin_row[j];
                if m.is_zero() {
                    continue;
                }
                let agree = &joint_row[j] / m;
                let rest = &one - m;
                if !rest.is_zero() {
                    let disagree = (&stats.totals[j] - &joint_row[j]) / &rest;
                    effect += agree - disagree;
                } else {
                    effect += agree;
                }
            }
            effect
        })
        .collect()
}

/// Compute every voter's effect, exactly or by stratified Monte Carlo.
pub fn effect_vector(
    f: &SocialChoiceFunction,
    dist: &Distribution,
    method: EffectMethod,
) -> Result<EffectVector, EffectsError> {
    match method {
        EffectMethod::Exact => {
            let stats = joint_stats(f, dist)?;
            Ok(EffectVector {
                method,
                values: exact_effects_from_stats(&stats)
                    .into_iter()
                    .map(EffectValue::Exact)
                    .collect(),
            })
        }
        EffectMethod::MonteCarlo { samples, seed } => {
            monte_carlo_effects(f, dist, samples, seed)
        }
    }
}

/// One sample stream; conditionals are estimated by counting the pairs
/// `(f(X), X_i)` rather than by separate conditional runs.
fn monte_carlo_effects(
    f: &SocialChoiceFunction,
    dist: &Distribution,
    samples: u64,
    seed: u64,
) -> Result<EffectVector, EffectsError> {
    let n = f.n();
    let k = f.k() as usize;
    if dist.n() != n {
        return Err(EffectsError::DimensionMismatch(format!(
            "distribution over {} voters, function takes {n}",
            dist.n()
        )));
    }
    assert!(samples > 0, "need at least one sample");
    let sampler = dist.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes = vec![vec![0u64; k]; n]; // #{X_i = j}
    let mut agree = vec![vec![0u64; k]; n]; // #{f = j, X_i = j}
    let mut outcomes = vec![0u64; k]; // #{f = j}
    for _ in 0..samples {
        let x = sampler.sample(&mut rng);
        let a = f.evaluate(&x)?;
        outcomes[a.index()] += 1;
        for (i, &vote) in x.entries().iter().enumerate() {
            votes[i][vote.index()] += 1;
            if vote == a {
                agree[i][a.index()] += 1;
            }
        }
    }
    let values = (0..n)
        .map(|i| {
            let mut estimate = 0.0;
            let mut variance = 0.0;
            for j in 0..k {
                let with = votes[i][j];
                let without = samples - with;
                if with == 0 {
                    continue;
                }
                let p_agree = agree[i][j] as f64 / with as f64;
                estimate += p_agree;
                variance += p_agree * (1.0 - p_agree) / with as f64;
                if without > 0 {
                    let p_disagree = (outcomes[j] - agree[i][j]) as f64 / without as f64;
                    estimate -= p_disagree;
                    variance += p_disagree * (1.0 - p_disagree) / without as f64;
                }
            }
            EffectValue::Estimate {
                value: estimate,
                std_err: variance.sqrt(),
            }
        })
        .collect();
    Ok(EffectVector {
        method: EffectMethod::MonteCarlo { samples, seed },
        values,
    })
}

/// Per-pair covariances `Cov(1{f=j}, 1{X_i=j})` and their weighted total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovarianceBreakdown {
    /// `per_pair[i][j] = Cov(1{f=j}, 1{X_i=j})`, exact.
    pub per_pair: Vec<Vec<Rational>>,
    /// `sum_{i,j} w_i * per_pair[i][j]`.
    pub weighted_total: Rational,
}

impl CovarianceBreakdown {
    pub fn all_nonnegative(&self) -> bool {
        self.per_pair
            .iter()
            .all(|row| row.iter().all(|c| !c.is_negative()))
    }
}

/// Exact `sum_{i,j} w_i Cov(1{f(X)=j}, 1{X_i=j})` with the per-pair table.
pub fn covariance_sum(
    f: &SocialChoiceFunction,
    dist: &Distribution,
    w: &WeightVector,
) -> Result<CovarianceBreakdown, EffectsError> {
    if w.len() != f.n() {
        return Err(EffectsError::DimensionMismatch(format!(
            "{} weights for {} voters",
            w.len(),
            f.n()
        )));
    }
    let stats = joint_stats(f, dist)?;
    Ok(covariances_from_stats(&stats, w))
}

fn covariances_from_stats(stats: &JointStats, w: &WeightVector) -> CovarianceBreakdown {
    let per_pair: Vec<Vec<Rational>> = stats
        .joint
        .iter()
        .zip(&stats.margins)
        .map(|(joint_row, margin_row)| {
            joint_row
                .iter()
                .zip(margin_row)
                .zip(&stats.totals)
                .map(|((j_ij, m_ij), t_j)| j_ij - t_j * m_ij)
                .collect()
        })
        .collect();
    let weighted_total = per_pair
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().sum::<Rational>() * w.get(i))
        .sum();
    CovarianceBreakdown {
        per_pair,
        weighted_total,
    }
}

/// Exact aggregation report for a preferred set of alternatives.
///
/// `delta` is the realized expected-weight gap
/// `min_{a in A} E W_a - max_{b not in A} E W_b`; `p_not_a = P(f(X) not in A)`;
/// `cov_sum` and `effect_bound = (1/4) sum_i w_i e_i` tie the miss
/// probability to the voters' effects. When `delta > 0` the chain
/// `delta * p_not_a <= cov_sum` holds unconditionally, and
/// `p_not_a <= effect_bound / delta` holds whenever every per-pair
/// covariance is nonnegative; with `delta <= 0` the flags are vacuous and
/// reported as null.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationReport {
    #[serde(rename = "A")]
    pub set_a: Vec<Alternative>,
    pub delta: Rational,
    pub p_not_a: Rational,
    pub cov_sum: Rational,
    pub effect_bound: Rational,
    pub all_covariances_nonnegative: bool,
    pub delta_chain_holds: Option<bool>,
    pub effect_chain_holds: Option<bool>,
}

/// Build the aggregation report for `(f, w, P, A)`.
///
/// `w` must certify `f` as a weighted plurality (checked exactly), and `A`
/// must be a nonempty proper subset of the alternatives.
pub fn aggregation_report(
    f: &SocialChoiceFunction,
    w: &WeightVector,
    dist: &Distribution,
    set_a: &[Alternative],
) -> Result<AggregationReport, EffectsError> {
    let k = f.k();
    let mut in_a = vec![false; k as usize];
    for a in set_a {
        if a.value() >= k {
            return Err(EffectsError::InvalidSet(format!(
                "alternative {a} is outside [{k}]"
            )));
        }
        if std::mem::replace(&mut in_a[a.index()], true) {
            return Err(EffectsError::InvalidSet(format!("duplicate alternative {a}")));
        }
    }
    let a_count = in_a.iter().filter(|&&b| b).count();
    if a_count == 0 || a_count == k as usize {
        return Err(EffectsError::InvalidSet(
            "A must be a nonempty proper subset of the alternatives".into(),
        ));
    }
    if w.len() != f.n() {
        return Err(EffectsError::DimensionMismatch(format!(
            "{} weights for {} voters",
            w.len(),
            f.n()
        )));
    }
    if !verify_weights(f, w) {
        return Err(EffectsError::NotAWeightedPlurality);
    }

    let expected = dist.expected_weights(w, k)?;
    let delta = {
        let min_in = expected
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| in_a[*j])
            .map(|(_, v)| v)
            .min()
            .expect("A is nonempty");
        let max_out = expected
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| !in_a[*j])
            .map(|(_, v)| v)
            .max()
            .expect("A is proper");
        min_in - max_out
    };

    let stats = joint_stats(f, dist)?;
    let p_not_a: Rational = stats
        .totals
        .iter()
        .enumerate()
        .filter(|(j, _)| !in_a[*j])
        .map(|(_, p)| p)
        .sum();
    let covariances = covariances_from_stats(&stats, w);
    let effects = exact_effects_from_stats(&stats);
    let effect_bound: Rational = effects
        .iter()
        .enumerate()
        .map(|(i, e)| w.get(i) * e)
        .sum::<Rational>()
        * Rational::new(1, 4);
    let all_covariances_nonnegative = covariances.all_nonnegative();

    let (delta_chain_holds, effect_chain_holds) = if delta.is_positive() {
        let delta_chain = &delta * &p_not_a <= covariances.weighted_total;
        let effect_chain = p_not_a <= &effect_bound / &delta;
        // For certified weights the first inequality is a theorem, as is the
        // second when every per-pair covariance is nonnegative; a violation
        // means broken arithmetic, not an unlucky input.
        assert!(
            delta_chain,
            "delta * P(f not in A) exceeded the covariance sum"
        );
        assert!(
            !all_covariances_nonnegative || effect_chain,
            "effect bound failed despite nonnegative covariances"
        );
        (Some(delta_chain), Some(effect_chain))
    } else {
        (None, None)
    };

    let mut sorted_a: Vec<Alternative> = set_a.to_vec();
    sorted_a.sort();
    Ok(AggregationReport {
        set_a: sorted_a,
        delta,
        p_not_a,
        cov_sum: covariances.weighted_total,
        effect_bound,
        all_covariances_nonnegative,
        delta_chain_holds,
        effect_chain_holds,
    })
}

/// Vote family for the effect-decay experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingFamily {
    /// Votes iid uniform on `[k]`.
    Uniform,
    /// Alternative 1 is favored: `P(X_i = 1) = (1 + (k-1) delta) / k`, every
    /// other alternative has probability `(1 - delta) / k`, so the realized
    /// gap is exactly `delta`.
    Biased { delta: f64 },
}

/// One experiment point: voter 1's estimated effect at electorate size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub estimate: f64,
    pub std_err: f64,
}

/// Estimate voter 1's effect for the unweighted first-match plurality at each
/// `n`, by direct rule evaluation of sampled profiles (no truth table).
pub fn effect_scaling_experiment(
    k: u32,
    family: &ScalingFamily,
    n_list: &[usize],
    samples: u64,
    seed: u64,
) -> Vec<ScalingPoint> {
    assert!(k >= 2, "need at least two alternatives");
    assert!(samples > 0, "need at least one sample");
    if let ScalingFamily::Biased { delta } = family {
        assert!(
            *delta > 0.0 && *delta <= 1.0,
            "bias must lie in (0, 1], got {delta}"
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    n_list
        .iter()
        .map(|&n| scaling_point(k, family, n, samples, &mut rng))
        .collect()
}

fn scaling_point(
    k: u32,
    family: &ScalingFamily,
    n: usize,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> ScalingPoint {
    let ku = k as usize;
    let favored_prob = match family {
        ScalingFamily::Uniform => 1.0 / k as f64,
        ScalingFamily::Biased { delta } => (1.0 + (k as f64 - 1.0) * delta) / k as f64,
    };
    let other_prob = (1.0 - favored_prob) / (k as f64 - 1.0);
    let others: Vec<u32> = (0..k).filter(|&v| v != 1).collect();

    let mut votes = vec![0u64; ku]; // #{X_1 = j}
    let mut agree = vec![0u64; ku]; // #{f = j, X_1 = j}
    let mut outcomes = vec![0u64; ku]; // #{f = j}
    let mut counts = vec![0u32; ku];
    let mut profile = vec![0u32; n];

    for _ in 0..samples {
        counts.iter_mut().for_each(|c| *c = 0);
        for slot in profile.iter_mut() {
            let vote = match family {
                ScalingFamily::Uniform => rng.gen_range(0..k),
                ScalingFamily::Biased { .. } => {
                    let r = rng.gen::<f64>();
                    if r < favored_prob {
                        1
                    } else {
                        let bucket = ((r - favored_prob) / other_prob) as usize;
                        others[bucket.min(others.len() - 1)]
                    }
                }
            };
            *slot = vote;
            counts[vote as usize] += 1;
        }
        let best = *counts.iter().max().expect("k >= 2");
        let winner = profile
            .iter()
            .copied()
            .find(|&v| counts[v as usize] == best)
            .expect("some voter voted for the plurality winner");
        outcomes[winner as usize] += 1;
        votes[profile[0] as usize] += 1;
        if profile[0] == winner {
            agree[winner as usize] += 1;
        }
    }

    let mut estimate = 0.0;
    let mut variance = 0.0;
    for j in 0..ku {
        let with = votes[j];
        let without = samples - with;
        if with == 0 {
            continue;
        }
        let p_agree = agree[j] as f64 / with as f64;
        estimate += p_agree;
        variance += p_agree * (1.0 - p_agree) / with as f64;
        if without > 0 {
            let p_disagree = (outcomes[j] - agree[j]) as f64 / without as f64;
            estimate -= p_disagree;
            variance += p_disagree * (1.0 - p_disagree) / without as f64;
        }
    }
    ScalingPoint {
        n,
        estimate,
        std_err: variance.sqrt(),
    }
}

/// Render experiment points as `n,estimate,stderr` CSV (with header).
pub fn scaling_csv(points: &[ScalingPoint]) -> String {
    let mut out = String::from("n,estimate,stderr\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.n, p.estimate, p.std_err));
    }
    out
}
