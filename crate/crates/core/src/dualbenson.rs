//! Dual outer approximation driven by a weighted-sum oracle.
//!
//! The lower image lives in `(w̄, a)`-space. Starting from one support
//! halfspace, the solver repeatedly picks an unvisited vertex `v` of the
//! current outer approximation and evaluates the support of the lower image
//! below it with one weighted-sum solve at `λ(v.w̄)`. If the ray from `v`
//! hits the boundary at `v`, the vertex is confirmed; otherwise the support
//! inequality of the returned outcome cuts `v` off. On termination the
//! support halfspaces that are facets of the final approximation are in
//! one-to-one correspondence with the extreme points of the Edgeworth-Pareto
//! hull.
//!
//! With `epsilon > 0`, cuts whose ray is shorter than `epsilon·scale` are
//! skipped. The result is then the vertex set of an inner approximation of
//! the hull, which is finite even when the hull has infinitely many extreme
//! points.

use std::collections::BTreeMap;

use crate::error::{Limit, SolveError};
use crate::linalg;
use crate::model::{OutcomePoint, Problem, SignRecord};
use crate::oracle::{OracleError, OracleStatus, WeightVector, WeightedSumOracle};
use crate::preprocess::Scaling;
use crate::vertexenum::{DualHalfspace, DualPolyhedron, GeomTolerances, GeometryError, HalfspaceId, VertexId};

/// Default vertex confirmation tolerance on the ray length.
pub const TOL_CONFIRM: f64 = 1e-6;
/// Outcome points closer than this (infinity norm) are reported once.
pub const TOL_DUPLICATE: f64 = 1e-6;

/// How the ray-length threshold `epsilon` is scaled at a vertex `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsilonScale {
    /// `epsilon · max(1, |v.a|)`
    #[default]
    Relative,
    /// `epsilon`
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub epsilon_scale: EpsilonScale,
    pub tol_confirm: f64,
    pub geometry: GeomTolerances,
    pub max_iterations: usize,
    pub normalize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            epsilon_scale: EpsilonScale::Relative,
            tol_confirm: TOL_CONFIRM,
            geometry: GeomTolerances::default(),
            max_iterations: 100_000,
            normalize: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let mut errs = Vec::new();
        if !(self.epsilon >= 0.0) {
            errs.push(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if !(self.tol_confirm > 0.0) {
            errs.push(format!("tol_confirm must be > 0, got {}", self.tol_confirm));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(SolveError::InvalidProblem(errs))
        }
    }

    /// Ray lengths at or below this value confirm the vertex.
    pub fn threshold(&self, a: f64) -> f64 {
        let scale = match self.epsilon_scale {
            EpsilonScale::Relative => a.abs().max(1.0),
            EpsilonScale::Absolute => 1.0,
        };
        self.tol_confirm.max(self.epsilon * scale)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub iterations: usize,
    pub oracle_calls: usize,
    pub cuts: usize,
    pub confirmations: usize,
    /// Cuts skipped by the epsilon rule although the ray was longer than `tol_confirm`.
    pub suppressed: usize,
    /// Vertex merges plus cuts rejected as numerically degenerate or redundant.
    pub degeneracy_events: usize,
}

#[derive(Debug, Clone)]
pub struct ExtremePointSet {
    pub points: Vec<OutcomePoint>,
    /// The support halfspaces that are facets of the final approximation.
    pub dual_facets: Vec<DualHalfspace>,
    pub dual_vertices: Vec<Vec<f64>>,
    /// The final outer approximation, in both representations.
    pub polyhedron: DualPolyhedron,
    /// False when the epsilon rule suppressed a cut, a cut had to be
    /// skipped for numerical reasons, or a limit stopped the run.
    pub exact: bool,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IterationAction {
    Confirmed,
    Suppressed,
    Cut { new_vertices: usize },
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveEvent {
    /// Ideal point (in minimization orientation) and objective multipliers.
    Preprocessed { ideal: Vec<f64>, multipliers: Vec<f64> },
    Initialized { y: Vec<f64> },
    Iteration {
        iteration: usize,
        vertex: Vec<f64>,
        ray_length: f64,
        action: IterationAction,
    },
    Finished { vertices: usize, facets: usize },
}

/// `(w̄_1, …, w̄_{d-1}, 1 - Σ w̄_i)`, clamped into the simplex.
pub fn lambda(wbar: &[f64]) -> WeightVector {
    let mut w: Vec<f64> = wbar.iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    if s > 1.0 {
        w.iter_mut().for_each(|v| *v /= s);
        w.push(0.0);
    } else {
        w.push(1.0 - s);
    }
    WeightVector::new(w).expect("clamped weight lies in the simplex")
}

/// The support inequality `a <= λ(w̄)ᵀy` of an attainable outcome `y`.
pub fn supporting_inequality(y: &OutcomePoint) -> DualHalfspace {
    DualHalfspace::support(&y.y)
}

/// Solves the weighted sum below dual vertex `coords` and returns the
/// outcome together with the length of the vertical ray from the vertex to
/// the lower image.
pub fn ray_shoot(
    coords: &[f64],
    p: &Problem,
    oracle: &dyn WeightedSumOracle,
) -> Result<(OutcomePoint, f64), SolveError> {
    let (wbar, a) = coords.split_at(coords.len() - 1);
    let w = lambda(wbar);
    let res = oracle.solve_weighted_sum_lex(p, &w)?;
    match res.status {
        OracleStatus::Optimal => {
            let point = res.point.ok_or_else(|| {
                SolveError::Oracle(OracleError::Numerical("optimal status without a point".into()))
            })?;
            let len = a[0] - w.dot(&point.y);
            Ok((point, len))
        }
        OracleStatus::Infeasible => Err(SolveError::Infeasible),
        OracleStatus::Unbounded => Err(SolveError::NoIdealPoint { objective: None }),
    }
}

/// Computes the extreme points of a minimization problem.
pub fn solve(p: &Problem, cfg: &SolverConfig, oracle: &dyn WeightedSumOracle) -> Result<ExtremePointSet, SolveError> {
    solve_observed(p, cfg, oracle, &mut |_| {})
}

pub fn solve_observed(
    p: &Problem,
    cfg: &SolverConfig,
    oracle: &dyn WeightedSumOracle,
    observer: &mut dyn FnMut(&SolveEvent),
) -> Result<ExtremePointSet, SolveError> {
    cfg.validate()?;
    let diags = p.validate();
    if !diags.is_empty() {
        return Err(SolveError::InvalidProblem(diags.iter().map(ToString::to_string).collect()));
    }
    let d = p.num_objectives();
    let mut stats = SolveStats::default();

    let init = oracle.solve_weighted_sum_lex(p, &WeightVector::uniform(d))?;
    stats.oracle_calls += 1;
    let y0 = match init.status {
        OracleStatus::Optimal => init
            .point
            .ok_or_else(|| SolveError::Oracle(OracleError::Numerical("optimal status without a point".into())))?,
        OracleStatus::Infeasible => return Err(SolveError::Infeasible),
        OracleStatus::Unbounded => return Err(SolveError::NoIdealPoint { objective: None }),
    };
    observer(&SolveEvent::Initialized { y: y0.y.clone() });
    let mut poly = DualPolyhedron::init_with_tolerances(d, supporting_inequality(&y0), cfg.geometry)?;
    let mut outcomes: BTreeMap<HalfspaceId, OutcomePoint> = BTreeMap::new();
    outcomes.insert(poly.halfspaces().len() - 1, y0);
    let mut exact = true;
    let mut rejected = 0;

    loop {
        let Some((vid, v)) = poly.unvisited() else {
            break;
        };
        if stats.iterations >= cfg.max_iterations {
            stats.degeneracy_events = rejected + poly.degeneracy_events();
            let partial = collect(&poly, &outcomes, false, stats);
            return Err(SolveError::LimitReached {
                limit: Limit::Iterations(cfg.max_iterations),
                partial: Some(Box::new(partial)),
            });
        }
        stats.iterations += 1;
        let coords = v.coords.clone();
        let shot = ray_shoot(&coords, p, oracle);
        stats.oracle_calls += 1;
        let (y, len) = match shot {
            Ok(r) => r,
            Err(SolveError::LimitReached { limit, .. }) => {
                stats.degeneracy_events = rejected + poly.degeneracy_events();
                let partial = collect(&poly, &outcomes, false, stats);
                return Err(SolveError::LimitReached {
                    limit,
                    partial: Some(Box::new(partial)),
                });
            }
            Err(e) => return Err(e),
        };
        let threshold = cfg.threshold(coords[d - 1]);
        let action = if len <= threshold {
            poly.mark_visited(vid);
            if len > cfg.tol_confirm {
                exact = false;
                stats.suppressed += 1;
                IterationAction::Suppressed
            } else {
                stats.confirmations += 1;
                IterationAction::Confirmed
            }
        } else {
            let hs = supporting_inequality(&y);
            let hid = poly.halfspaces().len();
            match poly.cut(hs) {
                Ok(new) => {
                    outcomes.insert(hid, y);
                    stats.cuts += 1;
                    IterationAction::Cut { new_vertices: new.len() }
                }
                Err(e @ (GeometryError::CutIsRedundant | GeometryError::NumericalDegeneracy(_))) => {
                    poly.mark_visited(vid);
                    rejected += 1;
                    exact = false;
                    IterationAction::Skipped(e.to_string())
                }
                Err(e) => return Err(e.into()),
            }
        };
        observer(&SolveEvent::Iteration {
            iteration: stats.iterations,
            vertex: coords,
            ray_length: len,
            action,
        });
    }

    stats.degeneracy_events = rejected + poly.degeneracy_events();
    let set = collect(&poly, &outcomes, exact, stats);
    observer(&SolveEvent::Finished {
        vertices: set.dual_vertices.len(),
        facets: set.dual_facets.len(),
    });
    Ok(set)
}

/// Reads the extreme points off the facets of the dual approximation.
fn collect(
    poly: &DualPolyhedron,
    outcomes: &BTreeMap<HalfspaceId, OutcomePoint>,
    exact: bool,
    stats: SolveStats,
) -> ExtremePointSet {
    let mut points: Vec<OutcomePoint> = Vec::new();
    let mut facets = Vec::new();
    for (&hid, y) in outcomes {
        if !poly.is_facet(hid) {
            continue;
        }
        let on: Vec<(VertexId, &[f64])> = poly.vertices_on(hid).map(|(id, v)| (id, v.wbar())).collect();
        let mut centroid = vec![0.0; poly.dim() - 1];
        for (_, w) in &on {
            for (c, x) in centroid.iter_mut().zip(*w) {
                *c += x / on.len() as f64;
            }
        }
        if points.iter().any(|q| linalg::max_abs_diff(&q.y, &y.y) <= TOL_DUPLICATE) {
            continue;
        }
        let mut point = y.clone();
        point.certifying_weight = Some(lambda(&centroid).into_inner());
        points.push(point);
        facets.push(poly.halfspaces()[hid].clone());
    }
    ExtremePointSet {
        points,
        dual_facets: facets,
        dual_vertices: poly.vertices().map(|(_, v)| v.coords.clone()).collect(),
        polyhedron: poly.clone(),
        exact,
        stats,
    }
}

/// An extreme point in the user's original objective orientation and units.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportedPoint {
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
    pub x: Vec<f64>,
}

/// Translates the dual facets into extreme points of the original problem,
/// undoing objective scaling and sign flips.
pub fn dual_to_primal_report(set: &ExtremePointSet, signs: &SignRecord, scaling: &Scaling) -> Vec<ReportedPoint> {
    set.points
        .iter()
        .map(|pt| {
            let y = signs.apply(&scaling.unapply(&pt.y));
            // A weight on scaled objectives is a weight on w_i·s_i in original units.
            let raw = pt.certifying_weight.clone().unwrap_or_else(|| vec![1.0 / pt.y.len() as f64; pt.y.len()]);
            let mut weight: Vec<f64> = raw.iter().zip(&scaling.multipliers).map(|(w, s)| w * s).collect();
            let total: f64 = weight.iter().sum();
            if total > 0.0 {
                weight.iter_mut().for_each(|w| *w /= total);
            }
            ReportedPoint {
                y,
                weight,
                x: pt.x.clone(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, ConstraintSense, Objective, Variable};
    use crate::oracle::BuiltinOracle;

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

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(&[0.3]).as_slice(), &[0.3, 0.7]);
        assert_eq!(lambda(&[1.0]).as_slice(), &[1.0, 0.0]);
        assert_eq!(lambda(&[-1e-12]).as_slice(), &[0.0, 1.0]);
        let w = lambda(&[0.7, 0.3 + 1e-12]);
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn supporting_inequality_examples() {
        let h = supporting_inequality(&OutcomePoint::new(vec![1.0, 0.0], vec![]));
        // a <= w1
        assert_eq!(h.excess(&[0.4, 0.4]), 0.0);
        let h = supporting_inequality(&OutcomePoint::new(vec![0.0, 1.0], vec![]));
        // a <= 1 - w1
        assert_eq!(h.excess(&[0.4, 0.6]), 0.0);
        let h = supporting_inequality(&OutcomePoint::new(vec![2.5; 3], vec![]));
        assert_eq!((h.g.clone(), h.rhs), (vec![0.0, 0.0], 2.5));
    }

    #[test]
    fn ray_shoot_examples() {
        let o = BuiltinOracle::default();
        let (y, len) = ray_shoot(&[1.0, 1.0], &e1(), &o).unwrap();
        assert!(linalg::max_abs_diff(&y.y, &[0.0, 1.0]) < 1e-9);
        assert!((len - 1.0).abs() < 1e-9);
        let (_, len) = ray_shoot(&[0.5, 0.5], &e1(), &o).unwrap();
        assert!(len.abs() < 1e-9);
        let (y, len) = ray_shoot(&[0.0, 0.0], &e1(), &o).unwrap();
        assert!(linalg::max_abs_diff(&y.y, &[1.0, 0.0]) < 1e-9);
        assert!(len.abs() < 1e-9);
    }

    #[test]
    fn e1_trace() {
        let mut events = Vec::new();
        let set = solve_observed(&e1(), &SolverConfig::default(), &BuiltinOracle::default(), &mut |e| {
            events.push(e.clone())
        })
        .unwrap();
        assert!(set.exact);
        let mut ys: Vec<Vec<f64>> = set.points.iter().map(|p| p.y.clone()).collect();
        ys.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!(linalg::max_abs_diff(&ys[0], &[0.0, 1.0]) < 1e-9);
        assert!(linalg::max_abs_diff(&ys[1], &[1.0, 0.0]) < 1e-9);
        let mut vs = set.dual_vertices.clone();
        vs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let expected = [[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]];
        assert_eq!(vs.len(), 3);
        for (v, e) in vs.iter().zip(&expected) {
            assert!(linalg::max_abs_diff(v, e) < 1e-9, "{v:?}");
        }
        assert_eq!(set.stats.cuts, 1);
        assert_eq!(set.stats.confirmations, 3);
        assert_eq!(set.stats.oracle_calls, 5);
        assert!(matches!(events.last(), Some(SolveEvent::Finished { vertices: 3, facets: 2 })));
    }

    #[test]
    fn ideal_point_feasible_gives_single_point() {
        let mut p = e1();
        p.constraints.clear();
        let set = solve(&p, &SolverConfig::default(), &BuiltinOracle::default()).unwrap();
        assert_eq!(set.points.len(), 1);
        assert_eq!(set.points[0].y, vec![0.0, 0.0]);
    }

    #[test]
    fn unbounded_is_no_ideal_point() {
        let mut p = e1();
        p.constraints.clear();
        p.variables[0].lower = f64::NEG_INFINITY;
        let err = solve(&p, &SolverConfig::default(), &BuiltinOracle::default()).unwrap_err();
        assert!(matches!(err, SolveError::NoIdealPoint { .. }), "{err:?}");
    }

    #[test]
    fn infeasible() {
        let mut p = e1();
        p.constraints.push(Constraint::new("c2", vec![1.0, 1.0], ConstraintSense::Le, 0.5));
        let err = solve(&p, &SolverConfig::default(), &BuiltinOracle::default()).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible));
    }

    #[test]
    fn iteration_limit_returns_partial() {
        let cfg = SolverConfig {
            max_iterations: 1,
            ..Default::default()
        };
        match solve(&e1(), &cfg, &BuiltinOracle::default()) {
            Err(SolveError::LimitReached {
                limit: Limit::Iterations(1),
                partial: Some(p),
            }) => assert!(!p.exact),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_negative_epsilon() {
        let cfg = SolverConfig {
            epsilon: -1.0,
            ..Default::default()
        };
        assert!(matches!(solve(&e1(), &cfg, &BuiltinOracle::default()), Err(SolveError::InvalidProblem(_))));
    }

    #[test]
    fn threshold_scaling() {
        let cfg = SolverConfig {
            epsilon: 0.01,
            ..Default::default()
        };
        assert_eq!(cfg.threshold(0.5), 0.01);
        assert_eq!(cfg.threshold(-20.0), 0.2);
        let abs = SolverConfig {
            epsilon_scale: EpsilonScale::Absolute,
            ..cfg
        };
        assert_eq!(abs.threshold(-20.0), 0.01);
    }
}
