//! Weighted-sum oracles.
//!
//! An oracle answers `min_{x ∈ X} wᵀf(x)` for a weight `w` in the unit
//! simplex. The outer-approximation driver only ever talks to a problem
//! through this interface, so any implementation of [`WeightedSumOracle`]
//! (for example one that handles quadratic terms) can replace the built-in
//! linear one.

mod ball;
pub mod branch;
pub mod simplex;

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::model::{ConstraintSense, ModelError, OutcomePoint, Problem};

pub use ball::BallOracle;
pub use branch::{solve_milp, BranchOptions, MilpSolution};
pub use simplex::{simplex_solve, LinearProgram, LinearRow, LpOutcome, LpSolution, SimplexOptions};

/// Tolerance on `Σw_i = 1` and `w_i >= 0`.
pub const TOL_W: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),
    #[error("branch-and-bound node limit of {0} exceeded")]
    NodeLimitExceeded(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A weight in the unit simplex `{w >= 0, Σw = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self, ModelError> {
        if w.is_empty() {
            return Err(ModelError::InvalidWeight("empty".into()));
        }
        if let Some(v) = w.iter().find(|v| !v.is_finite() || **v < -TOL_W) {
            return Err(ModelError::InvalidWeight(format!("component {v} is negative")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > TOL_W {
            return Err(ModelError::InvalidWeight(format!("components sum to {sum}")));
        }
        Ok(Self(w.into_iter().map(|v| v.max(0.0)).collect()))
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    /// Unit weight on objective `i`.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut w = vec![0.0; d];
        w[i] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: OracleStatus,
    /// `wᵀy` of the returned point; NaN unless optimal.
    pub value: f64,
    pub point: Option<OutcomePoint>,
}

impl OracleResult {
    pub fn optimal(w: &WeightVector, point: OutcomePoint) -> Self {
        Self {
            status: OracleStatus::Optimal,
            value: w.dot(&point.y),
            point: Some(point),
        }
    }

    pub fn infeasible() -> Self {
        Self {
            status: OracleStatus::Infeasible,
            value: f64::NAN,
            point: None,
        }
    }

    pub fn unbounded() -> Self {
        Self {
            status: OracleStatus::Unbounded,
            value: f64::NEG_INFINITY,
            point: None,
        }
    }
}

/// Counters describing the work an oracle has done.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub calls: u64,
    pub lp_solves: u64,
    pub pivots: u64,
    pub nodes: u64,
}

/// Solves weighted-sum scalarizations of a multi-objective problem.
///
/// Implementations must be reentrant: the driver may call them from several
/// threads on the same immutable problem.
pub trait WeightedSumOracle: Send + Sync {
    fn name(&self) -> &str;

    /// Any global minimizer of `wᵀf(x)` over the feasible set.
    fn solve_weighted_sum(&self, p: &Problem, w: &WeightVector) -> Result<OracleResult, OracleError>;

    /// A minimizer of `wᵀf(x)` that is non-dominated among all minimizers,
    /// even when some weights are zero.
    fn solve_weighted_sum_lex(&self, p: &Problem, w: &WeightVector)
        -> Result<OracleResult, OracleError>;

    fn stats(&self) -> OracleStats {
        OracleStats::default()
    }
}

/// Coefficients of the tie-breaking objective used by the second stage of
/// [`WeightedSumOracle::solve_weighted_sum_lex`].
///
/// All entries are strictly positive, so the stage-two optimum is
/// non-dominated. They are pairwise distinct irrational multiples so that
/// ties inside a face of the outcome polyhedron are broken toward a vertex.
pub fn tie_break_weights(d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| 1.0 + i as f64 * std::f64::consts::SQRT_2 / 100.0)
        .collect()
}

/// The built-in oracle for linear problems: simplex plus branch-and-bound.
#[derive(Debug, Default)]
pub struct BuiltinOracle {
    pub options: BranchOptions,
    calls: AtomicU64,
    lp_solves: AtomicU64,
    pivots: AtomicU64,
    nodes: AtomicU64,
}

impl BuiltinOracle {
    pub fn new(options: BranchOptions) -> Self {
        Self {
            options,
            ..Self::default()
        }
    }

    fn check(p: &Problem, w: &WeightVector) -> Result<(), OracleError> {
        if !p.is_linear() {
            return Err(OracleError::UnsupportedProblem(
                "the built-in oracle only handles linear problems; use a quadratic-capable plugin".into(),
            ));
        }
        if w.len() != p.num_objectives() {
            return Err(ModelError::Dimension {
                expected: p.num_objectives(),
                got: w.len(),
            }
            .into());
        }
        Ok(())
    }

    fn run(&self, lp: &LinearProgram, integer: &[bool]) -> Result<LpOutcome, OracleError> {
        let sol = solve_milp(lp, integer, &self.options)?;
        self.lp_solves.fetch_add(sol.nodes as u64, Ordering::Relaxed);
        self.pivots.fetch_add(sol.pivots as u64, Ordering::Relaxed);
        self.nodes.fetch_add(sol.nodes as u64, Ordering::Relaxed);
        Ok(sol.outcome)
    }

    fn stage_one(&self, p: &Problem, w: &WeightVector) -> Result<(LinearProgram, Vec<bool>, LpOutcome), OracleError> {
        let lp = linear_program(p, &combined_objective(p, w.as_slice()));
        let integer: Vec<bool> = p.variables.iter().map(|v| v.integer).collect();
        let out = self.run(&lp, &integer)?;
        Ok((lp, integer, out))
    }

    fn result(p: &Problem, w: &WeightVector, x: Vec<f64>) -> Result<OracleResult, OracleError> {
        let y = p.evaluate(&x)?;
        Ok(OracleResult::optimal(w, OutcomePoint::new(y, x)))
    }
}

impl WeightedSumOracle for BuiltinOracle {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve_weighted_sum(&self, p: &Problem, w: &WeightVector) -> Result<OracleResult, OracleError> {
        Self::check(p, w)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        let (_, _, out) = self.stage_one(p, w)?;
        match out {
            LpOutcome::Optimal { x, .. } => Self::result(p, w, x),
            LpOutcome::Infeasible => Ok(OracleResult::infeasible()),
            LpOutcome::Unbounded => Ok(OracleResult::unbounded()),
        }
    }

    fn solve_weighted_sum_lex(&self, p: &Problem, w: &WeightVector) -> Result<OracleResult, OracleError> {
        Self::check(p, w)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        let (mut lp, integer, out) = self.stage_one(p, w)?;
        let (x1, opt) = match out {
            LpOutcome::Optimal { x, value } => (x, value),
            LpOutcome::Infeasible => return Ok(OracleResult::infeasible()),
            LpOutcome::Unbounded => return Ok(OracleResult::unbounded()),
        };
        // Stage two: stay optimal for w, minimize the tie-break objective.
        let stage_one_cost = std::mem::replace(
            &mut lp.cost,
            combined_objective(p, &tie_break_weights(p.num_objectives())),
        );
        lp.add_row(stage_one_cost, ConstraintSense::Le, opt);
        match self.run(&lp, &integer)? {
            LpOutcome::Optimal { x, .. } => Self::result(p, w, x),
            // Only reachable through round-off; the stage-one point is still optimal.
            _ => Self::result(p, w, x1),
        }
    }

    fn stats(&self) -> OracleStats {
        OracleStats {
            calls: self.calls.load(Ordering::Relaxed),
            lp_solves: self.lp_solves.load(Ordering::Relaxed),
            pivots: self.pivots.load(Ordering::Relaxed),
            nodes: self.nodes.load(Ordering::Relaxed),
        }
    }
}

/// `Σ_i w_i c_i` in variable space.
pub fn combined_objective(p: &Problem, w: &[f64]) -> Vec<f64> {
    let mut cost = vec![0.0; p.num_variables()];
    for (o, &wi) in p.objectives.iter().zip(w) {
        if wi != 0.0 {
            for (c, &a) in cost.iter_mut().zip(&o.coefficients) {
                *c += wi * a;
            }
        }
    }
    cost
}

/// The linear relaxation of `p` with the given objective.
pub fn linear_program(p: &Problem, cost: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::new(cost.to_vec());
    lp.lower = p.variables.iter().map(|v| v.lower).collect();
    lp.upper = p.variables.iter().map(|v| v.upper).collect();
    for c in &p.constraints {
        lp.add_row(c.coefficients.clone(), c.sense, c.rhs);
    }
    lp
}

/// Minimizes `objectiveᵀx` over the mixed-integer feasible set of a linear
/// problem. The returned value is `objectiveᵀx`.
pub fn branch_and_bound(
    p: &Problem,
    objective: &[f64],
    options: &BranchOptions,
) -> Result<OracleResult, OracleError> {
    if !p.is_linear() {
        return Err(OracleError::UnsupportedProblem("quadratic terms present".into()));
    }
    if objective.len() != p.num_variables() {
        return Err(ModelError::Dimension {
            expected: p.num_variables(),
            got: objective.len(),
        }
        .into());
    }
    let lp = linear_program(p, objective);
    let integer: Vec<bool> = p.variables.iter().map(|v| v.integer).collect();
    match solve_milp(&lp, &integer, options)?.outcome {
        LpOutcome::Optimal { x, value } => {
            let y = p.evaluate(&x)?;
            Ok(OracleResult {
                status: OracleStatus::Optimal,
                value,
                point: Some(OutcomePoint::new(y, x)),
            })
        }
        LpOutcome::Infeasible => Ok(OracleResult::infeasible()),
        LpOutcome::Unbounded => Ok(OracleResult::unbounded()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, Objective, QuadraticForm, Variable};

    fn e1() -> Problem {
        Problem {
            name: "e1".into(),
            variables: vec![
                Variable::continuous("x1").with_bounds(0.0, 1.0),
                Variable::continuous("x2").with_bounds(0.0, 1.0),
            ],
            objectives: vec![
                Objective::minimize("f1", vec![1.0, 0.0]),
                Objective::minimize("f2", vec![0.0, 1.0]),
            ],
            constraints: vec![Constraint::new("c1", vec![1.0, 1.0], ConstraintSense::Ge, 1.0)],
        }
    }

    fn e2() -> Problem {
        Problem {
            name: "e2".into(),
            variables: vec![Variable::integer("x1", 0.0, 2.0), Variable::integer("x2", 0.0, 2.0)],
            objectives: vec![
                Objective::minimize("f1", vec![1.0, 0.0]),
                Objective::minimize("f2", vec![0.0, 1.0]),
            ],
            constraints: vec![
                Constraint::new("c1", vec![1.0, 2.0], ConstraintSense::Ge, 2.0),
                Constraint::new("c2", vec![2.0, 1.0], ConstraintSense::Ge, 2.0),
            ],
        }
    }

    /// Vertices of E1's feasible polygon, enumerated by hand.
    const E1_VERTICES: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        assert_eq!(WeightVector::new(vec![1.0 + 1e-10, -1e-10]).unwrap().as_slice(), &[1.0 + 1e-10, 0.0]);
    }

    #[test]
    fn e1_uniform_weight() {
        let expected = E1_VERTICES
            .iter()
            .map(|v| 0.5 * v[0] + 0.5 * v[1])
            .fold(f64::INFINITY, f64::min);
        let r = BuiltinOracle::default().solve_weighted_sum(&e1(), &w(&[0.5, 0.5])).unwrap();
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!((r.value - expected).abs() < 1e-9);
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn e1_unit_weight_lex() {
        let o = BuiltinOracle::default();
        let r = o.solve_weighted_sum_lex(&e1(), &w(&[1.0, 0.0])).unwrap();
        assert!((r.value - 0.0).abs() < 1e-9);
        let y = &r.point.unwrap().y;
        assert!((y[0] - 0.0).abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9, "{y:?}");
        assert_eq!(o.stats().calls, 1);
    }

    #[test]
    fn e2_unit_weight_lex() {
        let r = BuiltinOracle::default().solve_weighted_sum_lex(&e2(), &w(&[1.0, 0.0])).unwrap();
        assert_eq!(r.point.unwrap().y, vec![0.0, 2.0]);
    }

    #[test]
    fn e2_uniform_lex_returns_vertex() {
        // (1,1) ties with (2,0) and (0,2) at w = (1/2, 1/2) but is not extreme.
        let r = BuiltinOracle::default()
            .solve_weighted_sum_lex(&e2(), &WeightVector::uniform(2))
            .unwrap();
        let y = r.point.unwrap().y;
        assert!(y == vec![2.0, 0.0] || y == vec![0.0, 2.0], "{y:?}");
    }

    #[test]
    fn lex_matches_plain_on_unique_optimum() {
        let o = BuiltinOracle::default();
        let ww = w(&[0.3, 0.7]);
        let a = o.solve_weighted_sum(&e1(), &ww).unwrap();
        let b = o.solve_weighted_sum_lex(&e1(), &ww).unwrap();
        assert_eq!(a.point.unwrap().y, b.point.unwrap().y);
    }

    #[test]
    fn unbounded_problem() {
        let p = Problem {
            name: "u".into(),
            variables: vec![Variable::continuous("x1"), Variable::continuous("x2")],
            objectives: vec![
                Objective::minimize("f1", vec![-1.0, 0.0]),
                Objective::minimize("f2", vec![0.0, -1.0]),
            ],
            constraints: vec![],
        };
        let r = BuiltinOracle::default().solve_weighted_sum(&p, &w(&[0.5, 0.5])).unwrap();
        assert_eq!(r.status, OracleStatus::Unbounded);
    }

    #[test]
    fn infeasible_problem() {
        let mut p = e1();
        p.constraints.push(Constraint::new("c2", vec![1.0, 1.0], ConstraintSense::Ge, 3.0));
        let r = BuiltinOracle::default().solve_weighted_sum_lex(&p, &w(&[0.5, 0.5])).unwrap();
        assert_eq!(r.status, OracleStatus::Infeasible);
    }

    #[test]
    fn quadratic_rejected() {
        let mut p = e1();
        let mut q = QuadraticForm::new();
        q.add_term(0, 0, 1.0);
        p.objectives[0].quadratic = Some(q);
        assert!(matches!(
            BuiltinOracle::default().solve_weighted_sum(&p, &w(&[0.5, 0.5])),
            Err(OracleError::UnsupportedProblem(_))
        ));
    }

    #[test]
    fn branch_and_bound_on_problem() {
        let r = branch_and_bound(&e2(), &[1.0, 1.0], &BranchOptions::default()).unwrap();
        assert_eq!(r.status, OracleStatus::Optimal);
        assert_eq!(r.value, 2.0);
    }
}
