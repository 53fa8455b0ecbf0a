//! End-to-end solve: validation, orientation, ideal point, scaling, dual
//! outer approximation and reporting in user units.

use crate::dualbenson::{self, dual_to_primal_report, ExtremePointSet, ReportedPoint, SolveEvent, SolverConfig};
use crate::error::{Limit, SolveError};
use crate::model::{Problem, SignRecord};
use crate::oracle::WeightedSumOracle;
use crate::preprocess::{self, Scaling};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Complete,
    IterationLimit,
    NodeLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Complete => "complete",
            Termination::IterationLimit => "iteration_limit",
            Termination::NodeLimit => "node_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Extreme points in the original objective senses and units.
    pub points: Vec<ReportedPoint>,
    /// Raw result on the minimization, possibly scaled, problem.
    pub set: ExtremePointSet,
    pub signs: SignRecord,
    pub scaling: Scaling,
    /// Ideal point in the original objective senses.
    pub ideal: Vec<f64>,
    pub termination: Termination,
    /// Oracle calls including the ideal-point solves.
    pub oracle_calls: usize,
}

impl Solution {
    pub fn exact(&self) -> bool {
        self.set.exact && self.termination == Termination::Complete
    }
}

pub fn solve_problem(p: &Problem, cfg: &SolverConfig, oracle: &dyn WeightedSumOracle) -> Result<Solution, SolveError> {
    solve_problem_observed(p, cfg, oracle, &mut |_| {})
}

pub fn solve_problem_observed(
    p: &Problem,
    cfg: &SolverConfig,
    oracle: &dyn WeightedSumOracle,
    observer: &mut dyn FnMut(&SolveEvent),
) -> Result<Solution, SolveError> {
    cfg.validate()?;
    let diags = p.validate();
    if !diags.is_empty() {
        return Err(SolveError::InvalidProblem(diags.iter().map(ToString::to_string).collect()));
    }
    let (minp, signs) = p.to_minimization();
    let ideal = preprocess::compute_ideal_point(&minp, oracle)?;
    let (work, scaling) = if cfg.normalize {
        preprocess::normalize(&minp, &ideal)
    } else {
        (minp, Scaling::identity(p.num_objectives()))
    };
    observer(&SolveEvent::Preprocessed {
        ideal: ideal.ideal.clone(),
        multipliers: scaling.multipliers.clone(),
    });
    let (set, termination) = match dualbenson::solve_observed(&work, cfg, oracle, observer) {
        Ok(set) => (set, Termination::Complete),
        Err(SolveError::LimitReached {
            limit,
            partial: Some(set),
        }) => (
            *set,
            match limit {
                Limit::Iterations(_) => Termination::IterationLimit,
                Limit::Nodes(_) => Termination::NodeLimit,
            },
        ),
        Err(e) => return Err(e),
    };
    let points = dual_to_primal_report(&set, &signs, &scaling);
    let oracle_calls = set.stats.oracle_calls + p.num_objectives();
    Ok(Solution {
        points,
        ideal: signs.apply(&ideal.ideal),
        set,
        signs,
        scaling,
        termination,
        oracle_calls,
    })
}
