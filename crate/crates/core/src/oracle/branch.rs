//! Best-first branch-and-bound over the integer variables of a linear program.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{simplex_solve, LinearProgram, LpOutcome, SimplexOptions};
use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    pub node_limit: usize,
    /// Distance to the nearest integer below which a value counts as integral.
    pub tol_int: f64,
    pub simplex: SimplexOptions,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
            tol_int: 1e-6,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub outcome: LpOutcome,
    pub nodes: usize,
    pub pivots: usize,
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound and earlier creation pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Minimizes `lp` subject to integrality of the variables flagged in `integer`.
///
/// Branches on the most fractional variable; nodes whose relaxation bound
/// cannot improve on the incumbent are pruned.
pub fn solve_milp(
    lp: &LinearProgram,
    integer: &[bool],
    opts: &BranchOptions,
) -> Result<MilpSolution, OracleError> {
    let mut nodes = 0usize;
    let mut pivots = 0usize;
    let relax = |lower: &[f64], upper: &[f64], nodes: &mut usize, pivots: &mut usize| {
        *nodes += 1;
        if *nodes > opts.node_limit {
            return Err(OracleError::NodeLimitExceeded(opts.node_limit));
        }
        let mut sub = lp.clone();
        sub.lower.copy_from_slice(lower);
        sub.upper.copy_from_slice(upper);
        let sol = simplex_solve(&sub, &opts.simplex)?;
        *pivots += sol.pivots;
        Ok(sol.outcome)
    };

    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for (j, &int) in integer.iter().enumerate() {
        if int {
            lower[j] = (lower[j] - opts.tol_int).ceil();
            upper[j] = (upper[j] + opts.tol_int).floor();
        }
    }

    let root = relax(&lower, &upper, &mut nodes, &mut pivots)?;
    let (x, bound) = match root {
        LpOutcome::Optimal { x, value } => (x, value),
        other => {
            return Ok(MilpSolution {
                outcome: other,
                nodes,
                pivots,
            })
        }
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound,
        seq,
        lower,
        upper,
        x,
    });
    let mut incumbent: Option<(Vec<f64>, f64)> = None;

    while let Some(node) = heap.pop() {
        if let Some((_, best)) = &incumbent {
            if node.bound >= best - 1e-9 * (1.0 + best.abs()) {
                break;
            }
        }
        let branch_var = integer
            .iter()
            .enumerate()
            .filter(|&(_, &int)| int)
            .map(|(j, _)| (j, (node.x[j] - node.x[j].round()).abs()))
            .filter(|&(_, frac)| frac > opts.tol_int)
            .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some((j, _)) = branch_var else {
            let mut x = node.x;
            for (v, &int) in x.iter_mut().zip(integer) {
                if int {
                    *v = v.round();
                }
            }
            let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
            incumbent = Some((x, value));
            continue;
        };
        let v = node.x[j];
        let children = [
            (node.lower[j], v.floor()),
            (v.ceil(), node.upper[j]),
        ];
        for (lo, hi) in children {
            if lo > hi {
                continue;
            }
            let mut cl = node.lower.clone();
            let mut cu = node.upper.clone();
            cl[j] = lo;
            cu[j] = hi;
            if let LpOutcome::Optimal { x, value } = relax(&cl, &cu, &mut nodes, &mut pivots)? {
                if incumbent
                    .as_ref()
                    .is_none_or(|(_, best)| value < best - 1e-9 * (1.0 + best.abs()))
                {
                    seq += 1;
                    heap.push(Node {
                        bound: value,
                        seq,
                        lower: cl,
                        upper: cu,
                        x,
                    });
                }
            }
        }
    }

    let outcome = match incumbent {
        Some((x, value)) => LpOutcome::Optimal { x, value },
        None => LpOutcome::Infeasible,
    };
    Ok(MilpSolution {
        outcome,
        nodes,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintSense;

    fn e2_lp(cost: Vec<f64>) -> LinearProgram {
        let mut lp = LinearProgram::new(cost);
        lp.upper = vec![2.0, 2.0];
        lp.add_row(vec![1.0, 2.0], ConstraintSense::Ge, 2.0);
        lp.add_row(vec![2.0, 1.0], ConstraintSense::Ge, 2.0);
        lp
    }

    /// Exhaustive search over the integer grid `{0,1,2}²`.
    fn grid_optimum(lp: &LinearProgram) -> Option<f64> {
        let mut best: Option<f64> = None;
        for a in 0..=2 {
            for b in 0..=2 {
                let x = [a as f64, b as f64];
                if lp.max_violation(&x) <= 1e-9 {
                    let v = lp.cost[0] * x[0] + lp.cost[1] * x[1];
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    #[test]
    fn e2_relaxation_fractional_integer_optimum() {
        let lp = e2_lp(vec![1.0, 1.0]);
        let relaxed = simplex_solve(&lp, &SimplexOptions::default()).unwrap();
        match relaxed.outcome {
            // LP optimum 4/3 at (2/3, 2/3)
            LpOutcome::Optimal { value, .. } => assert!((value - 4.0 / 3.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
        let sol = solve_milp(&lp, &[true, true], &BranchOptions::default()).unwrap();
        match sol.outcome {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, grid_optimum(&lp).unwrap());
                assert!(x.iter().all(|v| v.fract() == 0.0));
            }
            o => panic!("{o:?}"),
        }
        assert!(sol.nodes > 1);
    }

    #[test]
    fn e2_various_costs_match_enumeration() {
        for cost in [[1.0, 2.0], [3.0, 1.0], [1.0, 1.05], [-1.0, 1.0], [0.5, 0.25]] {
            let lp = e2_lp(cost.to_vec());
            let sol = solve_milp(&lp, &[true, true], &BranchOptions::default()).unwrap();
            match sol.outcome {
                LpOutcome::Optimal { value, .. } => {
                    assert!((value - grid_optimum(&lp).unwrap()).abs() < 1e-9, "{cost:?}")
                }
                o => panic!("{o:?}"),
            }
        }
    }

    #[test]
    fn continuous_problem_matches_simplex() {
        let lp = e2_lp(vec![1.0, 1.0]);
        let a = solve_milp(&lp, &[false, false], &BranchOptions::default()).unwrap();
        let b = simplex_solve(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.nodes, 1);
    }

    #[test]
    fn empty_integer_set_is_infeasible() {
        // 0.2 <= x <= 0.8 has no integer point.
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_row(vec![1.0], ConstraintSense::Ge, 0.2);
        lp.add_row(vec![1.0], ConstraintSense::Le, 0.8);
        let sol = solve_milp(&lp, &[true], &BranchOptions::default()).unwrap();
        assert_eq!(sol.outcome, LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_relaxation() {
        let lp = LinearProgram::new(vec![-1.0, 0.0]);
        let sol = solve_milp(&lp, &[true, false], &BranchOptions::default()).unwrap();
        assert_eq!(sol.outcome, LpOutcome::Unbounded);
    }

    #[test]
    fn node_limit() {
        let lp = e2_lp(vec![1.0, 1.0]);
        let opts = BranchOptions {
            node_limit: 1,
            ..Default::default()
        };
        assert_eq!(
            solve_milp(&lp, &[true, true], &opts),
            Err(OracleError::NodeLimitExceeded(1))
        );
    }
}
