//! Ideal point and objective scaling.

use std::thread;

use crate::error::SolveError;
use crate::model::{OutcomePoint, Problem};
use crate::oracle::{OracleStatus, WeightVector, WeightedSumOracle};

/// Ranges at or below this are left unscaled.
pub const TOL_RANGE: f64 = 1e-9;

/// Per-objective positive multipliers `s_i`; scaled outcomes are `s_i·y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub multipliers: Vec<f64>,
}

impl Scaling {
    pub fn identity(d: usize) -> Self {
        Self {
            multipliers: vec![1.0; d],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.multipliers.iter().all(|&s| s == 1.0)
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.multipliers).map(|(v, s)| v * s).collect()
    }

    pub fn unapply(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.multipliers).map(|(v, s)| v / s).collect()
    }

    pub fn scale_problem(&self, p: &Problem) -> Problem {
        let mut q = p.clone();
        for (o, &s) in q.objectives.iter_mut().zip(&self.multipliers) {
            o.coefficients.iter_mut().for_each(|c| *c *= s);
            if let Some(quad) = o.quadratic.as_mut() {
                quad.scale(s);
            }
        }
        q
    }
}

/// The payoff table: row `i` is a non-dominated minimizer of objective `i`.
#[derive(Debug, Clone)]
pub struct IdealPoint {
    pub ideal: Vec<f64>,
    pub payoff: Vec<OutcomePoint>,
}

impl IdealPoint {
    /// `R_i = max_{j≠i} y^j_i - ideal_i`.
    pub fn ranges(&self) -> Vec<f64> {
        let d = self.ideal.len();
        (0..d)
            .map(|i| {
                let worst = (0..d)
                    .filter(|&j| j != i)
                    .map(|j| self.payoff[j].y[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                if worst.is_finite() {
                    worst - self.ideal[i]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Minimizes each objective separately (lexicographically, so every row of
/// the payoff table is non-dominated). The `d` solves run in parallel.
pub fn compute_ideal_point(p: &Problem, oracle: &dyn WeightedSumOracle) -> Result<IdealPoint, SolveError> {
    let d = p.num_objectives();
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = (0..d)
            .map(|i| s.spawn(move || oracle.solve_weighted_sum_lex(p, &WeightVector::unit(d, i))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle thread panicked")).collect()
    });
    let mut payoff = Vec::with_capacity(d);
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        match r.status {
            OracleStatus::Optimal => payoff.push(r.point.expect("optimal result carries a point")),
            OracleStatus::Infeasible => return Err(SolveError::Infeasible),
            OracleStatus::Unbounded => {
                return Err(SolveError::NoIdealPoint {
                    objective: Some(p.objectives[i].name.clone()),
                })
            }
        }
    }
    let ideal = (0..d).map(|i| payoff[i].y[i]).collect();
    Ok(IdealPoint { ideal, payoff })
}

/// Scales objective `i` by `1/R_i` so that every objective spans roughly
/// unit range over the payoff table.
pub fn normalize(p: &Problem, ideal: &IdealPoint) -> (Problem, Scaling) {
    let multipliers = ideal
        .ranges()
        .into_iter()
        .map(|r| if r > TOL_RANGE { 1.0 / r } else { 1.0 })
        .collect();
    let scaling = Scaling { multipliers };
    (scaling.scale_problem(p), scaling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, ConstraintSense, Objective, Variable};
    use crate::oracle::BuiltinOracle;

    fn skewed() -> Problem {
        Problem {
            name: "skewed".into(),
            variables: vec![
                Variable::continuous("x1").with_bounds(0.0, 1.0),
                Variable::continuous("x2").with_bounds(0.0, 1.0),
            ],
            objectives: vec![
                Objective::minimize("f1", vec![1000.0, 0.0]),
                Objective::minimize("f2", vec![0.0, 1.0]),
            ],
            constraints: vec![Constraint::new("c1", vec![1.0, 1.0], ConstraintSense::Ge, 1.0)],
        }
    }

    #[test]
    fn ideal_and_ranges() {
        let ip = compute_ideal_point(&skewed(), &BuiltinOracle::default()).unwrap();
        assert_eq!(ip.ideal, vec![0.0, 0.0]);
        let r = ip.ranges();
        assert!((r[0] - 1000.0).abs() < 1e-9 && (r[1] - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn normalize_scales_coefficients() {
        let p = skewed();
        let ip = compute_ideal_point(&p, &BuiltinOracle::default()).unwrap();
        let (q, s) = normalize(&p, &ip);
        assert!((q.objectives[0].coefficients[0] - 1.0).abs() < 1e-12);
        assert_eq!(q.objectives[1].coefficients, vec![0.0, 1.0]);
        let y = s.apply(&[1000.0, 3.0]);
        assert!((y[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.unapply(&y), vec![1000.0, 3.0]);
    }

    #[test]
    fn unbounded_objective_is_named() {
        let mut p = skewed();
        p.variables[1].upper = f64::INFINITY;
        p.objectives[1].coefficients[1] = -1.0;
        match compute_ideal_point(&p, &BuiltinOracle::default()) {
            Err(SolveError::NoIdealPoint { objective: Some(o) }) => assert_eq!(o, "f2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_range_left_alone() {
        let mut p = skewed();
        p.objectives[1].coefficients = vec![0.0, 0.0];
        let ip = compute_ideal_point(&p, &BuiltinOracle::default()).unwrap();
        let (_, s) = normalize(&p, &ip);
        assert_eq!(s.multipliers[1], 1.0);
    }
}
