//! Exact two-phase simplex for standard-form linear programs.
//!
//! Programs are `maximize c.x` subject to `A x = b`, `x >= 0`, over
//! rationals. The solver runs a dense tableau with Bland's anti-cycling
//! pivot rule, entirely in exact arithmetic: the sign of the optimum is the
//! mathematical verdict downstream, so no rounding is tolerated anywhere.
//!
//! An optimal solve returns primal values, the basis multipliers as dual
//! values, and the objective. Every optimal solution is checked against
//! [`verify_certificate`] (primal feasibility, dual feasibility,
//! complementary slackness, objective equality) before it is returned;
//! a failure is reported as [`LpError::SolverInconsistency`], which signals
//! an implementation bug, never a property of the input.

use itertools::Itertools;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),
}

/// `maximize c.x` subject to `A x = b`, `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardFormLP {
    objective: Vec<Rational>,
    constraints: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    var_names: Vec<String>,
    constraint_names: Vec<String>,
}

impl StandardFormLP {
    pub fn new(
        objective: Vec<Rational>,
        constraints: Vec<Vec<Rational>>,
        rhs: Vec<Rational>,
    ) -> Result<Self, LpError> {
        let m = objective.len();
        let r = constraints.len();
        if m == 0 {
            return Err(LpError::InvalidProgram("no variables".into()));
        }
        if r == 0 {
            return Err(LpError::InvalidProgram("no constraints".into()));
        }
        if rhs.len() != r {
            return Err(LpError::InvalidProgram(format!(
                "{} constraints but {} right-hand sides",
                r,
                rhs.len()
            )));
        }
        if let Some(row) = constraints.iter().find(|row| row.len() != m) {
            return Err(LpError::InvalidProgram(format!(
                "constraint row has {} coefficients, expected {m}",
                row.len()
            )));
        }
        let var_names = (1..=m).map(|j| format!("x{j}")).collect();
        let constraint_names = (1..=r).map(|i| format!("c{i}")).collect();
        Ok(StandardFormLP {
            objective,
            constraints,
            rhs,
            var_names,
            constraint_names,
        })
    }

    pub fn with_names(
        mut self,
        var_names: Vec<String>,
        constraint_names: Vec<String>,
    ) -> Result<Self, LpError> {
        if var_names.len() != self.num_vars() {
            return Err(LpError::InvalidProgram(format!(
                "{} variable names for {} variables",
                var_names.len(),
                self.num_vars()
            )));
        }
        if constraint_names.len() != self.num_constraints() {
            return Err(LpError::InvalidProgram(format!(
                "{} constraint names for {} constraints",
                constraint_names.len(),
                self.num_constraints()
            )));
        }
        self.var_names = var_names;
        self.constraint_names = constraint_names;
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Vec<Rational>] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn constraint_names(&self) -> &[String] {
        &self.constraint_names
    }

    /// Debug dump: the objective, then one line per constraint, with every
    /// coefficient in exact `a/b` notation.
    pub fn format_text(&self) -> String {
        let term = |c: &Rational, name: &String| format!("{c}*{name}");
        let mut out = format!(
            "maximize {}\n",
            self.objective
                .iter()
                .zip(&self.var_names)
                .map(|(c, name)| term(c, name))
                .join(" + ")
        );
        for (i, row) in self.constraints.iter().enumerate() {
            let lhs = row
                .iter()
                .zip(&self.var_names)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, name)| term(c, name))
                .join(" + ");
            let lhs = if lhs.is_empty() { "0".to_owned() } else { lhs };
            out.push_str(&format!(
                "{}: {} = {}\n",
                self.constraint_names[i], lhs, self.rhs[i]
            ));
        }
        out.push_str("all variables >= 0\n");
        out
    }
}

/// Verified optimal solution: exact primal, dual, and objective values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalSolution {
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub objective: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpSolution {
    Optimal(OptimalSolution),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn as_optimal(&self) -> Option<&OptimalSolution> {
        match self {
            LpSolution::Optimal(sol) => Some(sol),
            _ => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpSolution::Optimal(_))
    }
}

/// Exact certificate check for an optimal solution.
///
/// True iff the primal is feasible, the dual is feasible (`A^T y >= c`),
/// complementary slackness binds on every positive primal variable, and
/// `c.primal = b.dual = objective`, all as exact rational identities.
pub fn verify_certificate(lp: &StandardFormLP, sol: &OptimalSolution) -> bool {
    let m = lp.num_vars();
    let r = lp.num_constraints();
    if sol.primal.len() != m || sol.dual.len() != r {
        return false;
    }
    if sol.primal.iter().any(Rational::is_negative) {
        return false;
    }
    for (row, b) in lp.constraints.iter().zip(&lp.rhs) {
        let lhs: Rational = row.iter().zip(&sol.primal).map(|(a, x)| a * x).sum();
        if lhs != *b {
            return false;
        }
    }
    for j in 0..m {
        let aty: Rational = lp
            .constraints
            .iter()
            .zip(&sol.dual)
            .map(|(row, y)| &row[j] * y)
            .sum();
        if aty < lp.objective[j] {
            return false;
        }
        if sol.primal[j].is_positive() && aty != lp.objective[j] {
            return false;
        }
    }
    let primal_value: Rational = lp
        .objective
        .iter()
        .zip(&sol.primal)
        .map(|(c, x)| c * x)
        .sum();
    let dual_value: Rational = lp.rhs.iter().zip(&sol.dual).map(|(b, y)| b * y).sum();
    primal_value == sol.objective && dual_value == sol.objective
}

struct Tableau {
    /// Rows over structural columns `0..m` plus artificial columns `m..m+r`.
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    /// Original constraint index of each remaining row.
    kept: Vec<usize>,
    /// Total column count `m + r`; stable even if every row is removed.
    cols: usize,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.a.len()
    }

    /// Standard pivot: normalize the pivot row, eliminate the column
    /// elsewhere, and move `col` into the basis.
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for v in self.a[row].iter_mut() {
            *v *= &inv;
        }
        self.b[row] *= &inv;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row].clone();
        for i in 0..self.rows() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for (v, p) in self.a[i].iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
            self.b[i] -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    fn remove_row(&mut self, row: usize) {
        self.a.remove(row);
        self.b.remove(row);
        self.basis.remove(row);
        self.kept.remove(row);
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Bland's rule: entering = smallest-index improvable column, leaving =
/// smallest basic variable among the minimum-ratio rows. Terminates on every
/// input; the pivot budget turns any violation into a loud error.
fn run_phase(
    t: &mut Tableau,
    cost: impl Fn(usize) -> Rational,
    entering_limit: usize,
    pivots: &mut u64,
    budget: u64,
) -> Result<(PhaseOutcome, Rational), LpError> {
    let total_cols = t.cols;
    let cb: Vec<Rational> = t.basis.iter().map(|&j| cost(j)).collect();
    let mut rc: Vec<Rational> = (0..total_cols)
        .map(|j| {
            let z: Rational = cb.iter().zip(&t.a).map(|(c, row)| c * &row[j]).sum();
            cost(j) - z
        })
        .collect();
    let mut objective: Rational = cb.iter().zip(&t.b).map(|(c, b)| c * b).sum();

    loop {
        let entering = (0..entering_limit).find(|&j| rc[j].is_positive());
        let Some(col) = entering else {
            return Ok((PhaseOutcome::Optimal, objective));
        };

        let mut leaving: Option<(usize, Rational)> = None;
        for i in 0..t.rows() {
            if !t.a[i][col].is_positive() {
                continue;
            }
            let ratio = &t.b[i] / &t.a[i][col];
            leaving = match leaving {
                None => Some((i, ratio)),
                Some((best, best_ratio)) => {
                    if ratio < best_ratio
                        || (ratio == best_ratio && t.basis[i] < t.basis[best])
                    {
                        Some((i, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        let Some((row, _)) = leaving else {
            return Ok((PhaseOutcome::Unbounded, objective));
        };

        *pivots += 1;
        if *pivots > budget {
            return Err(LpError::SolverInconsistency(format!(
                "pivot budget {budget} exceeded; Bland's rule should have terminated"
            )));
        }

        let factor = rc[col].clone();
        t.pivot(row, col);
        for (rc_j, a_j) in rc.iter_mut().zip(&t.a[row]) {
            *rc_j -= &factor * a_j;
        }
        objective += &factor * &t.b[row];
    }
}

/// Twice `C(m + r, r)` plus the drive-out pivots, saturating: an upper bound
/// on the bases Bland's rule can visit per phase.
fn pivot_budget(m: usize, r: usize) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((m + r - i) as u128) / (i as u128 + 1);
        if acc > (u64::MAX / 4) as u128 {
            return u64::MAX;
        }
    }
    (acc as u64).saturating_mul(2).saturating_add(r as u64)
}

/// Two-phase exact simplex. On `Optimal`, all certificate invariants are
/// re-verified before the solution is returned.
pub fn solve(lp: &StandardFormLP) -> Result<LpSolution, LpError> {
    let m = lp.num_vars();
    let r = lp.num_constraints();

    let mut flipped = vec![false; r];
    let mut a = Vec::with_capacity(r);
    let mut b = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = lp.constraints[i].clone();
        let mut rhs = lp.rhs[i].clone();
        if rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
            rhs = -rhs;
            flipped[i] = true;
        }
        row.resize(m + r, Rational::zero());
        row[m + i] = Rational::one();
        a.push(row);
        b.push(rhs);
    }

    let mut t = Tableau {
        a,
        b,
        basis: (m..m + r).collect(),
        kept: (0..r).collect(),
        cols: m + r,
    };
    let budget = pivot_budget(m, r);
    let mut pivots = 0u64;

    // Phase 1: maximize -(sum of artificials); 0 iff the program is feasible.
    let phase1_cost = |j: usize| {
        if j < m {
            Rational::zero()
        } else {
            -Rational::one()
        }
    };
    let (outcome, infeasibility) = run_phase(&mut t, phase1_cost, m, &mut pivots, budget)?;
    if matches!(outcome, PhaseOutcome::Unbounded) {
        return Err(LpError::SolverInconsistency(
            "phase 1 is bounded by construction".into(),
        ));
    }
    if infeasibility.is_negative() {
        return Ok(LpSolution::Infeasible);
    }

    // Drive remaining artificials out of the basis; a row with no structural
    // coefficient left is redundant and carries dual value 0.
    let mut i = 0;
    while i < t.rows() {
        if t.basis[i] < m {
            i += 1;
            continue;
        }
        debug_assert!(t.b[i].is_zero(), "basic artificial must sit at zero");
        match (0..m).find(|&j| !t.a[i][j].is_zero()) {
            Some(j) => {
                pivots += 1;
                t.pivot(i, j);
                i += 1;
            }
            None => t.remove_row(i),
        }
    }

    // Phase 2 over the real objective; artificial columns stay as inert
    // bookkeeping (they never re-enter) so that B^{-1} remains readable.
    let objective = lp.objective.clone();
    let phase2_cost = |j: usize| {
        if j < m {
            objective[j].clone()
        } else {
            Rational::zero()
        }
    };
    let (outcome, value) = run_phase(&mut t, phase2_cost, m, &mut pivots, budget)?;
    if matches!(outcome, PhaseOutcome::Unbounded) {
        return Ok(LpSolution::Unbounded);
    }

    let mut primal = vec![Rational::zero(); m];
    for (i, &j) in t.basis.iter().enumerate() {
        debug_assert!(j < m, "artificials were driven out");
        primal[j] = t.b[i].clone();
    }

    // Dual values are the basis multipliers y = c_B B^{-1}, read off the
    // artificial columns (which started as the identity).
    let cb: Vec<Rational> = t.basis.iter().map(|&j| lp.objective[j].clone()).collect();
    let mut dual = vec![Rational::zero(); r];
    for &orig in &t.kept {
        let z: Rational = cb
            .iter()
            .zip(&t.a)
            .map(|(c, row)| c * &row[m + orig])
            .sum();
        dual[orig] = if flipped[orig] { -z } else { z };
    }

    let sol = OptimalSolution {
        primal,
        dual,
        objective: value,
    };
    if !verify_certificate(lp, &sol) {
        return Err(LpError::SolverInconsistency(
            "optimal solution failed its own certificate check".into(),
        ));
    }
    Ok(LpSolution::Optimal(sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn int(v: i64) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn single_point_feasible_set() {
        let lp = StandardFormLP::new(vec![int(1)], vec![vec![int(1)]], vec![int(1)]).unwrap();
        match solve(&lp).unwrap() {
            LpSolution::Optimal(sol) => {
                assert_eq!(sol.primal, vec![int(1)]);
                assert_eq!(sol.objective, int(1));
                assert_eq!(sol.dual, vec![int(1)]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_ray() {
        let lp = StandardFormLP::new(
            vec![int(1), int(0)],
            vec![vec![int(1), int(-1)]],
            vec![int(0)],
        )
        .unwrap();
        assert_eq!(solve(&lp).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn infeasible_negative_sum() {
        let lp = StandardFormLP::new(
            vec![int(0), int(0)],
            vec![vec![int(1), int(1)]],
            vec![int(-1)],
        )
        .unwrap();
        assert_eq!(solve(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn negative_rhs_feasible_instance() {
        // x1 - x2 = -2 with max -x1 - x2: optimum at (0, 2).
        let lp = StandardFormLP::new(
            vec![int(-1), int(-1)],
            vec![vec![int(1), int(-1)]],
            vec![int(-2)],
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        let sol = sol.as_optimal().unwrap();
        assert_eq!(sol.primal, vec![int(0), int(2)]);
        assert_eq!(sol.objective, int(-2));
    }

    #[test]
    fn redundant_rows_get_zero_duals() {
        let lp = StandardFormLP::new(
            vec![int(1), int(1)],
            vec![vec![int(1), int(1)], vec![int(1), int(1)]],
            vec![int(1), int(1)],
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        let sol = sol.as_optimal().unwrap();
        assert_eq!(sol.objective, int(1));
        assert!(verify_certificate(&lp, sol));
        assert_eq!(&sol.dual[1], &int(0));
    }

    #[test]
    fn beale_degenerate_instance_terminates() {
        // Classic cycling example for naive pivot rules; Bland terminates.
        // maximize 3/4 a - 150 b + 1/50 c - 6 d with three slack columns.
        let lp = StandardFormLP::new(
            vec![r(3, 4), int(-150), r(1, 50), int(-6), int(0), int(0), int(0)],
            vec![
                vec![r(1, 4), int(-60), r(-1, 25), int(9), int(1), int(0), int(0)],
                vec![r(1, 2), int(-90), r(-1, 50), int(3), int(0), int(1), int(0)],
                vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
            ],
            vec![int(0), int(0), int(1)],
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        let sol = sol.as_optimal().unwrap();
        assert_eq!(sol.objective, r(1, 20));
    }

    #[test]
    fn certificate_rejects_perturbations() {
        let lp = StandardFormLP::new(
            vec![int(1), int(2)],
            vec![
                vec![int(1), int(0)],
                vec![int(0), int(1)],
            ],
            vec![int(1), int(1)],
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        let sol = sol.as_optimal().unwrap();
        assert!(verify_certificate(&lp, sol));
        assert_eq!(sol.dual, vec![int(1), int(2)]);

        let mut nudged = sol.clone();
        nudged.primal[0] += r(1, 1_000_000);
        assert!(!verify_certificate(&lp, &nudged));

        let mut swapped = sol.clone();
        swapped.dual.swap(0, 1);
        assert!(!verify_certificate(&lp, &swapped));
    }

    #[test]
    fn format_text_is_exact() {
        let lp = StandardFormLP::new(
            vec![r(1, 3), int(0)],
            vec![vec![r(-2, 5), int(1)]],
            vec![r(7, 2)],
        )
        .unwrap()
        .with_names(
            vec!["u".into(), "v".into()],
            vec!["row".into()],
        )
        .unwrap();
        let text = lp.format_text();
        assert_eq!(text, "maximize 1/3*u + 0*v\nrow: -2/5*u + 1*v = 7/2\nall variables >= 0\n");
    }

    /// Random standard-form instance that is feasible by construction:
    /// b = A x0 for a nonnegative x0.
    fn random_feasible(seed: u64) -> (StandardFormLP, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=5);
        let r_rows = rng.gen_range(1..=3);
        let a: Vec<Vec<Rational>> = (0..r_rows)
            .map(|_| (0..m).map(|_| int(rng.gen_range(-3..=3))).collect())
            .collect();
        let x0: Vec<Rational> = (0..m).map(|_| int(rng.gen_range(0..=3))).collect();
        let b: Vec<Rational> = a
            .iter()
            .map(|row| row.iter().zip(&x0).map(|(av, xv)| av * xv).sum())
            .collect();
        let c: Vec<Rational> = (0..m).map(|_| int(rng.gen_range(-3..=3))).collect();
        let scale = rng.gen_range(1..=9);
        (StandardFormLP::new(c, a, b).unwrap(), scale)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Feasible-by-construction instances are never reported infeasible,
        /// and optimal ones satisfy strong duality exactly.
        #[test]
        fn strong_duality_on_feasible_instances(seed in 0u64..2000) {
            let (lp, _) = random_feasible(seed);
            match solve(&lp).unwrap() {
                LpSolution::Optimal(sol) => {
                    prop_assert!(verify_certificate(&lp, &sol));
                    let dual_value: Rational =
                        lp.rhs().iter().zip(&sol.dual).map(|(b, y)| b * y).sum();
                    prop_assert_eq!(dual_value, sol.objective.clone());
                }
                LpSolution::Unbounded => {}
                LpSolution::Infeasible => prop_assert!(false, "instance is feasible"),
            }
        }

        /// Scaling A and b by a positive integer changes neither the status
        /// nor the objective, and b.dual is invariant.
        #[test]
        fn scaling_invariance(seed in 0u64..2000) {
            let (lp, scale) = random_feasible(seed);
            let scaled = StandardFormLP::new(
                lp.objective().to_vec(),
                lp.constraints()
                    .iter()
                    .map(|row| row.iter().map(|v| v * int(scale as i64)).collect())
                    .collect(),
                lp.rhs().iter().map(|v| v * int(scale as i64)).collect(),
            )
            .unwrap();
            match (solve(&lp).unwrap(), solve(&scaled).unwrap()) {
                (LpSolution::Optimal(sol), LpSolution::Optimal(scaled_sol)) => {
                    prop_assert_eq!(&sol.objective, &scaled_sol.objective);
                    let bd: Rational =
                        lp.rhs().iter().zip(&sol.dual).map(|(b, y)| b * y).sum();
                    let bd_scaled: Rational = scaled
                        .rhs()
                        .iter()
                        .zip(&scaled_sol.dual)
                        .map(|(b, y)| b * y)
                        .sum();
                    prop_assert_eq!(bd, bd_scaled);
                }
                (LpSolution::Unbounded, LpSolution::Unbounded) => {}
                (a, b) => prop_assert!(false, "statuses diverged: {:?} vs {:?}", a, b),
            }
        }
    }
}
