//! The weighted-plurality decision: build the primal and dual programs for a
//! social choice function, solve them exactly, and certify the verdict.
//!
//! For a label pair `(a, b)` the primal maximizes `t+ - t-` subject to
//! `sum_i w_i = 1` and, for every profile `x` with `f(x) = a`,
//! `sum_{i: x_i = a} w_i - sum_{i: x_i = b} w_i - g_x - (t+ - t-) = 0`,
//! all variables nonnegative. A nonnegative optimum `t*` certifies the
//! function as a weighted plurality with the solved weights; a negative
//! optimum turns the dual multipliers `q_x <= 0` on the profile rows into a
//! witness distribution `p_x = q_x / sum q_x` under which `f = a` almost
//! surely while every voter prefers `b`. Certificates are re-verified by
//! exact independent checks before being returned, so a solver bug surfaces
//! as [`DecideError::SolverInconsistency`], never as a wrong verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, ExplicitDistribution};
use crate::lp::{solve, LpError, LpSolution, OptimalSolution, StandardFormLP};
use crate::rational::Rational;
use crate::scf::{Alternative, Neutrality, Permutation, Profile, ScfError, SocialChoiceFunction};
use crate::weights::WeightVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecideError {
    #[error("function is not neutral: relabeling {permutation} at profile {profile} changes the winner inconsistently")]
    NotNeutral {
        permutation: Permutation,
        profile: Profile,
    },
    #[error("no profile maps to alternative {label}; the pair contributes no constraints")]
    DegenerateFunction { label: Alternative },
    #[error("invalid label pair: {0}")]
    InvalidLabels(String),
    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),
    #[error(
        "the function is not a weighted plurality, but no single ordered pair \
         of alternatives admits a witness distribution; only the joint system \
         over all pairs is infeasible"
    )]
    NoSinglePairWitness,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Scf(#[from] ScfError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// The ordered label pair `(a, b)` used by a decision program: constraints
/// compare the weight of `a` (the asserted winner label) against `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(Alternative, Alternative)", into = "(Alternative, Alternative)")]
pub struct Labels {
    pub winner: Alternative,
    pub challenger: Alternative,
}

impl Labels {
    pub fn new(winner: Alternative, challenger: Alternative) -> Self {
        Labels { winner, challenger }
    }
}

impl From<(Alternative, Alternative)> for Labels {
    fn from((winner, challenger): (Alternative, Alternative)) -> Self {
        Labels { winner, challenger }
    }
}

impl From<Labels> for (Alternative, Alternative) {
    fn from(labels: Labels) -> Self {
        (labels.winner, labels.challenger)
    }
}

/// The fixed reporting pair: `(1, 2)` for `k >= 3`, `(1, 0)` for `k = 2`.
/// For neutral functions every pair gives the same verdict; fixing one makes
/// outputs reproducible.
pub fn canonical_labels(k: u32) -> Labels {
    if k >= 3 {
        Labels::new(Alternative(1), Alternative(2))
    } else {
        Labels::new(Alternative(1), Alternative(0))
    }
}

fn validate_labels(k: u32, labels: Labels) -> Result<(), DecideError> {
    if labels.winner.value() >= k || labels.challenger.value() >= k {
        return Err(DecideError::InvalidLabels(format!(
            "labels ({}, {}) out of range for [{k}]",
            labels.winner, labels.challenger
        )));
    }
    if labels.winner == labels.challenger {
        return Err(DecideError::InvalidLabels(format!(
            "labels must be distinct, got ({}, {})",
            labels.winner, labels.challenger
        )));
    }
    Ok(())
}

/// Primal decision program plus the row-to-profile mapping needed to read
/// dual values back as a witness.
#[derive(Debug, Clone)]
pub struct PrimalLp {
    pub lp: StandardFormLP,
    pub labels: Labels,
    /// Profile index of constraint row `i + 1` (row 0 is the normalization).
    pub preimage: Vec<usize>,
}

/// Build the primal program for one label pair.
///
/// Variables are ordered `t+, t-, w_1..w_n, g_x..` with the `g_x` in
/// ascending profile-index order; constraint row 0 is `sum w_i = 1`.
pub fn build_primal(
    f: &SocialChoiceFunction,
    labels: Labels,
) -> Result<PrimalLp, DecideError> {
    validate_labels(f.k(), labels)?;
    let preimage = f.preimage(labels.winner);
    if preimage.is_empty() {
        return Err(DecideError::DegenerateFunction {
            label: labels.winner,
        });
    }
    let n = f.n();
    let num_vars = 2 + n + preimage.len();

    let mut objective = vec![Rational::zero(); num_vars];
    objective[0] = Rational::one();
    objective[1] = -Rational::one();

    let mut constraints = Vec::with_capacity(1 + preimage.len());
    let mut rhs = Vec::with_capacity(1 + preimage.len());
    let mut constraint_names = Vec::with_capacity(1 + preimage.len());

    let mut norm_row = vec![Rational::zero(); num_vars];
    for i in 0..n {
        norm_row[2 + i] = Rational::one();
    }
    constraints.push(norm_row);
    rhs.push(Rational::one());
    constraint_names.push("normalize".to_owned());

    for (pos, &idx) in preimage.iter().enumerate() {
        let mut row = vec![Rational::zero(); num_vars];
        row[0] = -Rational::one();
        row[1] = Rational::one();
        let x = Profile::from_index(idx, f.k(), n);
        for (i, &vote) in x.entries().iter().enumerate() {
            if vote == labels.winner {
                row[2 + i] = Rational::one();
            } else if vote == labels.challenger {
                row[2 + i] = -Rational::one();
            }
        }
        row[2 + n + pos] = -Rational::one();
        constraints.push(row);
        rhs.push(Rational::zero());
        constraint_names.push(format!("wp[x={idx}]"));
    }

    let mut var_names = vec!["t+".to_owned(), "t-".to_owned()];
    var_names.extend((1..=n).map(|i| format!("w{i}")));
    var_names.extend(preimage.iter().map(|idx| format!("g[x={idx}]")));

    let lp = StandardFormLP::new(objective, constraints, rhs)?
        .with_names(var_names, constraint_names)?;
    Ok(PrimalLp {
        lp,
        labels,
        preimage,
    })
}

/// Dual decision program in standard form, plus the mapping back to the
/// printed dual's variables.
#[derive(Debug, Clone)]
pub struct DualLp {
    pub lp: StandardFormLP,
    pub labels: Labels,
    pub preimage: Vec<usize>,
}

impl DualLp {
    /// The dual program minimizes `a+ - a-`; the standard form maximizes its
    /// negation, so the printed optimum `a*` is the negated LP objective.
    pub fn printed_optimum(&self, sol: &OptimalSolution) -> Rational {
        -&sol.objective
    }

    /// The printed dual variables `q_x <= 0`, recovered from the sign-flipped
    /// standard-form variables.
    pub fn witness_values(&self, sol: &OptimalSolution) -> Vec<Rational> {
        (0..self.preimage.len())
            .map(|pos| -&sol.primal[2 + pos])
            .collect()
    }
}

/// Build the dual program for one label pair.
///
/// The dual has variables `a+, a-` and `q_x <= 0` for `x` in the winner
/// preimage, minimizing `a+ - a-` subject to a unit of total mass on the
/// `q_x` and, per voter `i`, `sum_x (1{x_i=a} - 1{x_i=b}) q_x + (a+ - a-)
/// >= 0`. Conversion to standard form flips signs (`q_x = -r_x`) and adds a
/// slack per voter; both one-sided mass constraints implied by the `t+`/`t-`
/// columns of the primal collapse to `sum r_x = 1`, which keeps the program
/// bounded with optimum exactly `t*`.
pub fn build_dual(f: &SocialChoiceFunction, labels: Labels) -> Result<DualLp, DecideError> {
    validate_labels(f.k(), labels)?;
    let preimage = f.preimage(labels.winner);
    if preimage.is_empty() {
        return Err(DecideError::DegenerateFunction {
            label: labels.winner,
        });
    }
    let n = f.n();
    let count = preimage.len();
    let num_vars = 2 + count + n;

    let mut objective = vec![Rational::zero(); num_vars];
    objective[0] = Rational::one();
    objective[1] = -Rational::one();

    let mut constraints = Vec::with_capacity(1 + n);
    let mut rhs = Vec::with_capacity(1 + n);
    let mut constraint_names = Vec::with_capacity(1 + n);

    let mut mass_row = vec![Rational::zero(); num_vars];
    for pos in 0..count {
        mass_row[2 + pos] = Rational::one();
    }
    constraints.push(mass_row);
    rhs.push(Rational::one());
    constraint_names.push("mass".to_owned());

    for i in 0..n {
        let mut row = vec![Rational::zero(); num_vars];
        row[0] = Rational::one();
        row[1] = -Rational::one();
        for (pos, &idx) in preimage.iter().enumerate() {
            let vote = Profile::from_index(idx, f.k(), n).entries()[i];
            if vote == labels.winner {
                row[2 + pos] = Rational::one();
            } else if vote == labels.challenger {
                row[2 + pos] = -Rational::one();
            }
        }
        row[2 + count + i] = Rational::one();
        constraints.push(row);
        rhs.push(Rational::zero());
        constraint_names.push(format!("voter{}", i + 1));
    }

    let mut var_names = vec!["-a+".to_owned(), "-a-".to_owned()];
    var_names.extend(preimage.iter().map(|idx| format!("-q[x={idx}]")));
    var_names.extend((1..=n).map(|i| format!("s{i}")));

    let lp = StandardFormLP::new(objective, constraints, rhs)?
        .with_names(var_names, constraint_names)?;
    Ok(DualLp {
        lp,
        labels,
        preimage,
    })
}

/// Verdict of the decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "wp")]
    IsWeightedPlurality,
    #[serde(rename = "not-wp")]
    NotWeightedPlurality,
}

/// Certified decision: either weights or a witness, never both.
///
/// Serializes as the decision report JSON, e.g.
/// `{"verdict":"wp","optimum":"1","labels":[1,0],"weights":["1","0"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    /// `t* = a*`, the shared optimum of the primal and dual programs.
    pub optimum: Rational,
    /// Label pair used by the program (for the all-pairs mode, the pair
    /// reported: the canonical pair on success, the witnessing pair on
    /// failure).
    pub labels: Labels,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<WeightVector>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<ExplicitDistribution>,
}

/// Which decision program to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One label pair; requires a neutral function. The verdict extends to
    /// all pairs by relabeling symmetry.
    Neutral,
    /// One joint program over all ordered pairs; accepts any function.
    General,
}

/// Decide whether `f` is a weighted plurality and certify the answer.
pub fn decide(f: &SocialChoiceFunction, mode: Mode) -> Result<DecisionOutcome, DecideError> {
    match mode {
        Mode::Neutral => decide_with_labels(f, canonical_labels(f.k())),
        Mode::General => decide_general(f),
    }
}

/// Neutral-mode decision with an explicit label pair.
pub fn decide_with_labels(
    f: &SocialChoiceFunction,
    labels: Labels,
) -> Result<DecisionOutcome, DecideError> {
    validate_labels(f.k(), labels)?;
    if let Neutrality::NotNeutral {
        permutation,
        profile,
    } = f.is_neutral()
    {
        return Err(DecideError::NotNeutral {
            permutation,
            profile,
        });
    }

    let primal = build_primal(f, labels)?;
    let sol = solve_decision_lp(&primal.lp)?;
    let optimum = sol.objective.clone();
    if !optimum.is_negative() {
        let weights = weights_from_solution(f, &sol)?;
        Ok(DecisionOutcome {
            verdict: Verdict::IsWeightedPlurality,
            optimum,
            labels,
            weights: Some(weights),
            witness: None,
        })
    } else {
        let q = &sol.dual[1..];
        let witness = extract_witness(q, &primal.preimage, f, labels)?;
        if !verify_witness(f, &witness, labels) {
            return Err(DecideError::SolverInconsistency(
                "extracted witness failed exact verification".into(),
            ));
        }
        Ok(DecisionOutcome {
            verdict: Verdict::NotWeightedPlurality,
            optimum,
            labels,
            weights: None,
            witness: Some(witness),
        })
    }
}

/// All-pairs decision (the direct check of the weighted-plurality
/// definition); accepts non-neutral functions.
fn decide_general(f: &SocialChoiceFunction) -> Result<DecisionOutcome, DecideError> {
    let k = f.k();
    let n = f.n();
    let preimages: Vec<Vec<usize>> = (0..k).map(|a| f.preimage(Alternative(a))).collect();
    let pairs: Vec<Labels> = ordered_pairs(k)
        .filter(|labels| !preimages[labels.winner.index()].is_empty())
        .collect();
    let row_count: usize = pairs
        .iter()
        .map(|labels| preimages[labels.winner.index()].len())
        .sum();
    let num_vars = 2 + n + row_count;

    let mut objective = vec![Rational::zero(); num_vars];
    objective[0] = Rational::one();
    objective[1] = -Rational::one();

    let mut constraints = Vec::with_capacity(1 + row_count);
    let mut rhs = Vec::with_capacity(1 + row_count);
    let mut norm_row = vec![Rational::zero(); num_vars];
    for i in 0..n {
        norm_row[2 + i] = Rational::one();
    }
    constraints.push(norm_row);
    rhs.push(Rational::one());

    let mut g_col = 2 + n;
    for labels in &pairs {
        for &idx in &preimages[labels.winner.index()] {
            let mut row = vec![Rational::zero(); num_vars];
            row[0] = -Rational::one();
            row[1] = Rational::one();
            let x = Profile::from_index(idx, k, n);
            for (i, &vote) in x.entries().iter().enumerate() {
                if vote == labels.winner {
                    row[2 + i] = Rational::one();
                } else if vote == labels.challenger {
                    row[2 + i] = -Rational::one();
                }
            }
            row[g_col] = -Rational::one();
            g_col += 1;
            constraints.push(row);
            rhs.push(Rational::zero());
        }
    }

    let lp = StandardFormLP::new(objective, constraints, rhs)?;
    let sol = solve_decision_lp(&lp)?;
    let optimum = sol.objective.clone();

    if !optimum.is_negative() {
        let weights = weights_from_solution(f, &sol)?;
        return Ok(DecisionOutcome {
            verdict: Verdict::IsWeightedPlurality,
            optimum,
            labels: canonical_labels(k),
            weights: Some(weights),
            witness: None,
        });
    }

    // A witness in the sense of the single-pair program: some pair whose own
    // system is already infeasible. The joint infeasibility above does not
    // always localize to one pair, so search them all.
    for labels in ordered_pairs(k) {
        if preimages[labels.winner.index()].is_empty() {
            continue;
        }
        let primal = build_primal(f, labels)?;
        let pair_sol = solve_decision_lp(&primal.lp)?;
        if pair_sol.objective.is_negative() {
            let q = &pair_sol.dual[1..];
            let witness = extract_witness(q, &primal.preimage, f, labels)?;
            if !verify_witness(f, &witness, labels) {
                return Err(DecideError::SolverInconsistency(
                    "extracted witness failed exact verification".into(),
                ));
            }
            return Ok(DecisionOutcome {
                verdict: Verdict::NotWeightedPlurality,
                optimum,
                labels,
                weights: None,
                witness: Some(witness),
            });
        }
    }
    Err(DecideError::NoSinglePairWitness)
}

fn ordered_pairs(k: u32) -> impl Iterator<Item = Labels> {
    (0..k).flat_map(move |a| {
        (0..k)
            .filter(move |&b| b != a)
            .map(move |b| Labels::new(Alternative(a), Alternative(b)))
    })
}

/// The decision programs are feasible and bounded by construction, so any
/// other solver outcome is an internal error.
fn solve_decision_lp(lp: &StandardFormLP) -> Result<OptimalSolution, DecideError> {
    match solve(lp)? {
        LpSolution::Optimal(sol) => Ok(sol),
        other => Err(DecideError::SolverInconsistency(format!(
            "decision program reported {other:?}, but it is feasible and bounded"
        ))),
    }
}

/// Read the `w` block out of a primal solution and re-verify it exactly.
fn weights_from_solution(
    f: &SocialChoiceFunction,
    sol: &OptimalSolution,
) -> Result<WeightVector, DecideError> {
    let n = f.n();
    let weights = WeightVector::new(sol.primal[2..2 + n].to_vec())
        .map_err(|e| DecideError::SolverInconsistency(format!("solved weights invalid: {e}")))?;
    if !verify_weights(f, &weights) {
        return Err(DecideError::SolverInconsistency(
            "solved weights failed exact verification".into(),
        ));
    }
    Ok(weights)
}

/// Normalize dual values `q_x <= 0` on the winner-preimage rows into the
/// witness distribution `p_x = q_x / sum_x q_x`, dropping zero entries.
pub fn extract_witness(
    q: &[Rational],
    preimage: &[usize],
    f: &SocialChoiceFunction,
    labels: Labels,
) -> Result<ExplicitDistribution, DecideError> {
    if q.len() != preimage.len() {
        return Err(DecideError::SolverInconsistency(format!(
            "{} dual values for {} preimage rows",
            q.len(),
            preimage.len()
        )));
    }
    if let Some(&idx) = preimage.iter().find(|&&idx| f.value_at(idx) != labels.winner) {
        return Err(DecideError::SolverInconsistency(format!(
            "preimage row x={idx} does not map to the winner label {}",
            labels.winner
        )));
    }
    if let Some(bad) = q.iter().find(|v| v.is_positive()) {
        return Err(DecideError::SolverInconsistency(format!(
            "dual value {bad} is positive; witness rows must have q_x <= 0"
        )));
    }
    let total: Rational = q.iter().sum();
    if total > -Rational::one() {
        return Err(DecideError::SolverInconsistency(format!(
            "dual mass {total} violates sum q_x <= -1"
        )));
    }
    let entries = preimage
        .iter()
        .zip(q)
        .filter(|(_, qx)| !qx.is_zero())
        .map(|(&idx, qx)| (Profile::from_index(idx, f.k(), f.n()), qx / &total));
    ExplicitDistribution::new(entries)
        .map_err(|e| DecideError::SolverInconsistency(format!("witness normalization failed: {e}")))
}

/// Exact check of the weighted-plurality definition: for every profile the
/// chosen alternative carries weakly maximal total weight.
pub fn verify_weights(f: &SocialChoiceFunction, w: &WeightVector) -> bool {
    if w.len() != f.n() {
        return false;
    }
    let k = f.k() as usize;
    let mut totals = vec![Rational::zero(); k];
    let mut counter = crate::scf::ProfileCounter::new(f.k(), f.n());
    let mut idx = 0usize;
    loop {
        for t in totals.iter_mut() {
            *t = Rational::zero();
        }
        for (i, &d) in counter.digits().iter().enumerate() {
            totals[d as usize] += w.get(i);
        }
        let winner = f.value_at(idx);
        let winner_weight = &totals[winner.index()];
        if totals.iter().any(|t| t > winner_weight) {
            return false;
        }
        idx += 1;
        if !counter.advance() {
            break;
        }
    }
    true
}

/// Exact check of a witness: the winner label is chosen almost surely while
/// every voter strictly prefers the challenger.
pub fn verify_witness(
    f: &SocialChoiceFunction,
    witness: &ExplicitDistribution,
    labels: Labels,
) -> bool {
    if witness.n() != f.n() {
        return false;
    }
    for (x, _) in witness.support() {
        match f.evaluate(x) {
            Ok(v) if v == labels.winner => {}
            _ => return false,
        }
    }
    for voter in 0..f.n() {
        let pa = witness
            .marginal(voter, labels.winner)
            .expect("voter index in range");
        let pb = witness
            .marginal(voter, labels.challenger)
            .expect("voter index in range");
        if pb <= pa {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scf::{build_weighted_plurality, random_neutral_function, TieBreakRule};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn labels(a: u32, b: u32) -> Labels {
        Labels::new(Alternative(a), Alternative(b))
    }

    fn dictator(k: u32, n: usize) -> SocialChoiceFunction {
        let w = WeightVector::new(
            std::iter::once(Rational::one())
                .chain(std::iter::repeat_with(Rational::zero).take(n - 1))
                .collect(),
        )
        .unwrap();
        build_weighted_plurality(k, n, &w, TieBreakRule::FirstMatchingVoter).unwrap()
    }

    fn parity(n: usize) -> SocialChoiceFunction {
        let size = 1usize << n;
        let table = (0..size)
            .map(|idx: usize| Alternative(idx.count_ones() % 2))
            .collect();
        SocialChoiceFunction::new(2, n, table).unwrap()
    }

    fn parity_witness() -> ExplicitDistribution {
        ExplicitDistribution::new([
            (Profile::from_values(&[1, 0, 0]), r(1, 3)),
            (Profile::from_values(&[0, 1, 0]), r(1, 3)),
            (Profile::from_values(&[0, 0, 1]), r(1, 3)),
        ])
        .unwrap()
    }

    #[test]
    fn primal_shapes_match_construction() {
        let p = build_primal(&dictator(2, 1), labels(1, 0)).unwrap();
        assert_eq!(p.lp.num_vars(), 4);
        assert_eq!(p.lp.num_constraints(), 2);

        let p = build_primal(&parity(3), labels(1, 0)).unwrap();
        assert_eq!(p.preimage.len(), 4);
        assert_eq!(p.lp.num_vars(), 9);
        assert_eq!(p.lp.num_constraints(), 5);

        let plur = build_weighted_plurality(
            3,
            3,
            &WeightVector::uniform(3),
            TieBreakRule::FirstMatchingVoter,
        )
        .unwrap();
        let p = build_primal(&plur, labels(1, 2)).unwrap();
        assert_eq!(p.preimage.len(), 9);
        assert_eq!(p.lp.num_constraints(), 10);
    }

    #[test]
    fn degenerate_preimage_is_an_error() {
        let table = vec![Alternative(0); 4];
        let constant = SocialChoiceFunction::new(2, 2, table).unwrap();
        assert!(matches!(
            build_primal(&constant, labels(1, 0)),
            Err(DecideError::DegenerateFunction { .. })
        ));
    }

    #[test]
    fn dual_reproduces_primal_optimum_by_hand() {
        // Dictator on one voter: t* = a* = 1.
        let f = dictator(2, 1);
        let primal = build_primal(&f, labels(1, 0)).unwrap();
        let t = solve(&primal.lp).unwrap();
        let t = t.as_optimal().unwrap();
        assert_eq!(t.objective, Rational::one());

        let dual = build_dual(&f, labels(1, 0)).unwrap();
        let d = solve(&dual.lp).unwrap();
        let d = d.as_optimal().unwrap();
        assert_eq!(dual.printed_optimum(d), Rational::one());

        // Parity on three voters: t* = a* = -1/3.
        let f = parity(3);
        let primal = build_primal(&f, labels(1, 0)).unwrap();
        let t = solve(&primal.lp).unwrap();
        let t = t.as_optimal().unwrap();
        assert_eq!(t.objective, r(-1, 3));

        let dual = build_dual(&f, labels(1, 0)).unwrap();
        let d = solve(&dual.lp).unwrap();
        let d = d.as_optimal().unwrap();
        assert_eq!(dual.printed_optimum(d), r(-1, 3));
        let q = dual.witness_values(d);
        assert!(q.iter().all(|v| !v.is_positive()));
    }

    #[test]
    fn parity_is_not_a_weighted_plurality() {
        let f = parity(3);
        let outcome = decide(&f, Mode::Neutral).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotWeightedPlurality);
        assert!(outcome.optimum.is_negative());
        let witness = outcome.witness.expect("negative verdict carries a witness");
        assert!(verify_witness(&f, &witness, outcome.labels));

        // The hand-built three-point witness also verifies.
        assert!(verify_witness(&f, &parity_witness(), labels(1, 0)));
    }

    #[test]
    fn dictator_is_a_weighted_plurality_with_optimum_one() {
        for (k, n) in [(2, 3), (3, 2), (4, 2)] {
            let f = dictator(k, n);
            let outcome = decide(&f, Mode::Neutral).unwrap();
            assert_eq!(outcome.verdict, Verdict::IsWeightedPlurality);
            assert_eq!(outcome.optimum, Rational::one());
            let w = outcome.weights.unwrap();
            assert!(verify_weights(&f, &w));
            // t* = 1 forces all weight on the dictating voter.
            assert_eq!(w.get(0), &Rational::one());
        }
    }

    #[test]
    fn fixed_winner_majority_is_wp_in_general_mode() {
        let f = build_weighted_plurality(
            2,
            2,
            &WeightVector::uniform(2),
            TieBreakRule::FixedWinner(Alternative(1)),
        )
        .unwrap();
        assert!(matches!(
            decide(&f, Mode::Neutral),
            Err(DecideError::NotNeutral { .. })
        ));
        let outcome = decide(&f, Mode::General).unwrap();
        assert_eq!(outcome.verdict, Verdict::IsWeightedPlurality);
        assert!(verify_weights(&f, &WeightVector::uniform(2)));
    }

    #[test]
    fn constant_function_is_rejected_with_witness() {
        let table = vec![Alternative(0); 4];
        let f = SocialChoiceFunction::new(2, 2, table).unwrap();
        let outcome = decide(&f, Mode::General).unwrap();
        assert_eq!(outcome.verdict, Verdict::NotWeightedPlurality);
        let witness = outcome.witness.unwrap();
        assert!(verify_witness(&f, &witness, outcome.labels));
        assert_eq!(outcome.labels.winner, Alternative(0));
    }

    #[test]
    fn verify_weights_examples() {
        let f = dictator(2, 3);
        let unit = WeightVector::new(vec![Rational::one(), Rational::zero(), Rational::zero()])
            .unwrap();
        assert!(verify_weights(&f, &unit));

        let f = parity(3);
        assert!(!verify_weights(&f, &WeightVector::uniform(3)));
        assert!(!verify_weights(&f, &unit));

        let maj = build_weighted_plurality(
            2,
            3,
            &WeightVector::uniform(3),
            TieBreakRule::FirstMatchingVoter,
        )
        .unwrap();
        assert!(verify_weights(&maj, &WeightVector::uniform(3)));
        assert!(!verify_weights(&maj, &WeightVector::uniform(2)));
    }

    #[test]
    fn extract_witness_normalization() {
        let f = parity(3);
        // Preimage of 1 is profiles (1,0,0), (0,1,0), (0,0,1), (1,1,1).
        let preimage = f.preimage(Alternative(1));
        assert_eq!(preimage, vec![1, 2, 4, 7]);

        let q = vec![r(-1, 1), r(-1, 1), r(-1, 1), Rational::zero()];
        let w = extract_witness(&q, &preimage, &f, labels(1, 0)).unwrap();
        assert_eq!(w, parity_witness());

        let q = vec![r(-2, 1), r(-1, 1), Rational::zero(), Rational::zero()];
        let w = extract_witness(&q, &preimage, &f, labels(1, 0)).unwrap();
        assert_eq!(
            w.probability_of(&Profile::from_values(&[1, 0, 0])).unwrap(),
            r(2, 3)
        );
        assert_eq!(
            w.probability_of(&Profile::from_values(&[0, 1, 0])).unwrap(),
            r(1, 3)
        );

        // Single supported profile collapses to a point mass.
        let q = vec![r(-1, 1), Rational::zero(), Rational::zero(), Rational::zero()];
        let w = extract_witness(&q, &preimage, &f, labels(1, 0)).unwrap();
        assert_eq!(w.support_len(), 1);

        let q = vec![r(1, 2), r(-3, 2), Rational::zero(), Rational::zero()];
        assert!(extract_witness(&q, &preimage, &f, labels(1, 0)).is_err());
        let q = vec![r(-1, 4), Rational::zero(), Rational::zero(), Rational::zero()];
        assert!(extract_witness(&q, &preimage, &f, labels(1, 0)).is_err());
    }

    #[test]
    fn verify_witness_rejections() {
        let f = parity(3);
        // All-winner point mass: the marginal inequality fails.
        let point = ExplicitDistribution::point_mass(Profile::from_values(&[1, 1, 1]));
        assert!(!verify_witness(&f, &point, labels(1, 0)));

        // Support leaking outside the winner preimage fails.
        let leak = ExplicitDistribution::new([
            (Profile::from_values(&[1, 0, 0]), r(1, 2)),
            (Profile::from_values(&[1, 1, 0]), r(1, 2)),
        ])
        .unwrap();
        assert!(!verify_witness(&f, &leak, labels(1, 0)));
    }

    #[test]
    fn built_pluralities_verify_with_their_own_weights() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let k = rng.gen_range(2..=3);
            let n = rng.gen_range(1..=4);
            let mut parts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=9)).collect();
            if parts.iter().all(|&v| v == 0) {
                parts[0] = 1;
            }
            let total: i64 = parts.iter().sum();
            let w = WeightVector::new(parts.iter().map(|&v| Rational::new(v, total)).collect())
                .unwrap();
            for tb in [
                TieBreakRule::FirstMatchingVoter,
                TieBreakRule::FixedWinner(Alternative(rng.gen_range(0..k))),
            ] {
                let f = build_weighted_plurality(k, n, &w, tb).unwrap();
                assert!(verify_weights(&f, &w), "k={k} n={n} w={:?}", w.entries());
            }
        }
    }

    #[test]
    fn neutral_and_general_modes_agree() {
        for seed in 0..20 {
            let k = if seed % 2 == 0 { 2 } else { 3 };
            let f = random_neutral_function(k, 3, seed).unwrap();
            let neutral = decide(&f, Mode::Neutral).unwrap();
            let general = decide(&f, Mode::General).unwrap();
            assert_eq!(neutral.verdict, general.verdict, "seed {seed}");
        }
    }

    #[test]
    fn report_json_shape() {
        let outcome = decide(&dictator(2, 2), Mode::Neutral).unwrap();
        let json = serde_json::to_string(&outcome).unwrap();
        assert_eq!(
            json,
            r#"{"verdict":"wp","optimum":"1","labels":[1,0],"weights":["1","0"]}"#
        );
        let back: DecisionOutcome = serde_json::from_str(&json).unwrap();
        assert_eq!(back, outcome);

        let outcome = decide(&parity(3), Mode::Neutral).unwrap();
        let json = serde_json::to_string(&outcome).unwrap();
        assert!(json.contains(r#""verdict":"not-wp""#));
        assert!(json.contains(r#""witness":{"type":"explicit""#));
        let back: DecisionOutcome = serde_json::from_str(&json).unwrap();
        assert_eq!(back, outcome);
    }
}
