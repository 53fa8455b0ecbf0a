use std::sync::atomic::{AtomicU64, Ordering};

use crate::model::{ConstraintSense, OutcomePoint, Problem};

use super::{tie_break_weights, OracleError, OracleResult, OracleStats, WeightVector, WeightedSumOracle};

/// Closed-form oracle for linear objectives over a Euclidean ball.
///
/// Accepts problems whose only constraint is `Σ x_j² <= r²` over free
/// continuous variables. The minimizer of `(Cᵀw)ᵀx` is `-r·g/‖g‖` with
/// `g = Cᵀw`. The Edgeworth-Pareto hull of such a problem has infinitely
/// many extreme points, which makes it the reference case for the
/// ray-length threshold.
#[derive(Debug, Default)]
pub struct BallOracle {
    calls: AtomicU64,
}

impl BallOracle {
    pub fn new() -> Self {
        Self::default()
    }

    fn radius(p: &Problem) -> Result<f64, OracleError> {
        let unsupported = |why: &str| Err(OracleError::UnsupportedProblem(format!("ball oracle: {why}")));
        if p.objectives.iter().any(|o| o.quadratic.as_ref().is_some_and(|q| !q.is_empty())) {
            return unsupported("objectives must be linear");
        }
        if p.variables.iter().any(|v| v.integer || v.lower.is_finite() || v.upper.is_finite()) {
            return unsupported("variables must be free and continuous");
        }
        let [c] = p.constraints.as_slice() else {
            return unsupported("expected exactly one constraint");
        };
        let n = p.num_variables();
        let identity = c.quadratic.as_ref().is_some_and(|q| {
            q.terms().all(|(i, j, v)| if i == j { v == 1.0 } else { v == 0.0 })
                && (0..n).all(|i| q.entry(i, i) == 1.0)
        });
        if !identity
            || c.coefficients.iter().any(|&a| a != 0.0)
            || c.sense != ConstraintSense::Le
            || c.rhs <= 0.0
        {
            return unsupported("constraint must read `[ x1^2 + ... + xn^2 ] <= r^2`");
        }
        Ok(c.rhs.sqrt())
    }

    fn minimize(p: &Problem, weights: &[f64], radius: f64) -> Option<Vec<f64>> {
        let n = p.num_variables();
        let mut g = vec![0.0; n];
        for (o, &w) in p.objectives.iter().zip(weights) {
            for (gj, &c) in g.iter_mut().zip(&o.coefficients) {
                *gj += w * c;
            }
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        (norm > 0.0).then(|| g.iter().map(|v| -radius * v / norm).collect())
    }
}

impl WeightedSumOracle for BallOracle {
    fn name(&self) -> &str {
        "ball"
    }

    fn solve_weighted_sum(&self, p: &Problem, w: &WeightVector) -> Result<OracleResult, OracleError> {
        let r = Self::radius(p)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        let x = Self::minimize(p, w.as_slice(), r).unwrap_or_else(|| vec![0.0; p.num_variables()]);
        let y = p.evaluate(&x)?;
        Ok(OracleResult::optimal(w, OutcomePoint::new(y, x)))
    }

    fn solve_weighted_sum_lex(&self, p: &Problem, w: &WeightVector) -> Result<OracleResult, OracleError> {
        let r = Self::radius(p)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        // A zero gradient makes every feasible point optimal; fall back to the tie-break.
        let x = Self::minimize(p, w.as_slice(), r)
            .or_else(|| Self::minimize(p, &tie_break_weights(p.num_objectives()), r))
            .unwrap_or_else(|| vec![0.0; p.num_variables()]);
        let y = p.evaluate(&x)?;
        Ok(OracleResult::optimal(w, OutcomePoint::new(y, x)))
    }

    fn stats(&self) -> OracleStats {
        OracleStats {
            calls: self.calls.load(Ordering::Relaxed),
            ..OracleStats::default()
        }
    }
}
