//! Random instance generators and brute-force reference solvers.
//!
//! The brute-force routines share no code with the solver loop: extreme
//! points are found by enumerating every integer assignment and every vertex
//! of the continuous slice, then keeping the outcomes that a weight vector
//! separates strictly from all others. They are exponential and only meant
//! for the small instances used as ground truth in tests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg;
use crate::model::{dominates, Constraint, ConstraintSense, Objective, OutcomePoint, Problem, Variable, TOL_FEAS};
use crate::oracle::simplex::{simplex_solve, LinearProgram, LpOutcome, SimplexOptions};
use crate::vertexenum::DualHalfspace;

/// Strict separation margin for the brute-force extreme point test.
pub const SEPARATION_DELTA: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    MoilpGeneral,
    MomilpMixed,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::MoilpGeneral => "moilp_general",
            Family::MomilpMixed => "momilp_mixed",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moilp_general" => Ok(Family::MoilpGeneral),
            "momilp_mixed" => Ok(Family::MomilpMixed),
            other => Err(format!("unknown family `{other}` (expected moilp_general or momilp_mixed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub objective_range: (i64, i64),
    pub constraint_range: (i64, i64),
    /// Upper bound of every variable; lower bounds are 0.
    pub upper: i64,
    /// Fraction of integer variables for [`Family::MomilpMixed`].
    pub integer_ratio: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, d: usize, n: usize, seed: u64) -> Self {
        Self {
            family,
            d,
            n,
            m: n / 2 + 1,
            objective_range: (-10, 10),
            constraint_range: (1, 10),
            upper: 10,
            integer_ratio: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |why: String| Err(GenError::InvalidSpec(why));
        if self.d < 2 {
            return bad(format!("d must be >= 2, got {}", self.d));
        }
        if self.n < self.d {
            return bad(format!("n must be >= d, got n={} d={}", self.n, self.d));
        }
        if self.objective_range.0 > self.objective_range.1 || self.constraint_range.0 > self.constraint_range.1 {
            return bad("empty coefficient range".into());
        }
        if self.upper < 0 {
            return bad(format!("upper bound must be >= 0, got {}", self.upper));
        }
        if !(0.0..=1.0).contains(&self.integer_ratio) {
            return bad(format!("integer ratio must lie in [0, 1], got {}", self.integer_ratio));
        }
        Ok(())
    }

    pub fn num_integer(&self) -> usize {
        match self.family {
            Family::MoilpGeneral => self.n,
            Family::MomilpMixed => (self.integer_ratio * self.n as f64).round() as usize,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Random instance with knapsack-style covering rows `Σ a_j x_j >= ⌊Σ a_j·U/2⌋`.
/// Integer variables come first. The same spec always yields the same problem.
pub fn generate(spec: &GenSpec) -> Result<Problem, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ints = spec.num_integer();
    let u = spec.upper as f64;
    let variables = (0..spec.n)
        .map(|j| {
            let name = format!("x{}", j + 1);
            if j < ints {
                Variable::integer(name, 0.0, u)
            } else {
                Variable::continuous(name).with_bounds(0.0, u)
            }
        })
        .collect();
    let (olo, ohi) = spec.objective_range;
    let objectives = (0..spec.d)
        .map(|i| {
            let c = (0..spec.n).map(|_| rng.random_range(olo..=ohi) as f64).collect();
            Objective::minimize(format!("f{}", i + 1), c)
        })
        .collect();
    let (clo, chi) = spec.constraint_range;
    let constraints = (0..spec.m)
        .map(|k| {
            let a: Vec<f64> = (0..spec.n).map(|_| rng.random_range(clo..=chi) as f64).collect();
            let rhs = (a.iter().sum::<f64>() * u / 2.0).floor();
            Constraint::new(format!("c{}", k + 1), a, ConstraintSense::Ge, rhs)
        })
        .collect();
    Ok(Problem {
        name: format!("{}_d{}_n{}_s{}", spec.family, spec.d, spec.n, spec.seed),
        variables,
        objectives,
        constraints,
    })
}

/// A random spec small enough for [`brute_force_extreme_points`]: `d` in
/// 2..=4, at most 3 integer variables over `{0,…,4}` and at most 2
/// continuous ones on `[0, 4]`.
pub fn enumerable_spec(seed: u64) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let d: usize = rng.random_range(2..=4);
    let n: usize = rng.random_range(d..=5);
    let ints = rng.random_range(n.saturating_sub(2)..=n.min(3));
    GenSpec {
        m: rng.random_range(1..=3),
        upper: 4,
        integer_ratio: ints as f64 / n as f64,
        ..GenSpec::new(Family::MomilpMixed, d, n, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_assignments: usize,
    pub max_continuous: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_assignments: 100_000,
            max_continuous: 4,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BruteForceError {
    #[error("instance exceeds brute-force caps: {0}")]
    CapsExceeded(String),
    #[error("brute force needs a linear problem")]
    NotLinear,
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Extreme points with a strictly separating weight as certificate.
    pub points: Vec<OutcomePoint>,
    /// Distinct outcome points examined.
    pub enumerated: usize,
    pub infeasible: bool,
}

/// Extreme points of the Edgeworth-Pareto hull by exhaustive enumeration.
pub fn brute_force_extreme_points(p: &Problem, caps: Caps) -> Result<BruteForceResult, BruteForceError> {
    if !p.is_linear() {
        return Err(BruteForceError::NotLinear);
    }
    let int_idx: Vec<usize> = (0..p.num_variables()).filter(|&j| p.variables[j].integer).collect();
    let cont_idx: Vec<usize> = (0..p.num_variables()).filter(|&j| !p.variables[j].integer).collect();
    if cont_idx.len() > caps.max_continuous {
        return Err(BruteForceError::CapsExceeded(format!(
            "{} continuous variables (cap {})",
            cont_idx.len(),
            caps.max_continuous
        )));
    }
    let mut ranges = Vec::new();
    let mut total: usize = 1;
    for &j in &int_idx {
        let v = &p.variables[j];
        if !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(BruteForceError::CapsExceeded(format!("integer variable `{}` is unbounded", v.name)));
        }
        let (lo, hi) = (v.lower.ceil() as i64, v.upper.floor() as i64);
        let count = (hi - lo + 1).max(0) as usize;
        total = total.saturating_mul(count);
        ranges.push((lo, hi));
    }
    if total > caps.max_assignments {
        return Err(BruteForceError::CapsExceeded(format!(
            "{total} integer assignments (cap {})",
            caps.max_assignments
        )));
    }

    let mut outcomes: Vec<OutcomePoint> = Vec::new();
    let mut assignment: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    for _ in 0..total {
        let mut x = vec![0.0; p.num_variables()];
        for (&j, &v) in int_idx.iter().zip(&assignment) {
            x[j] = v as f64;
        }
        for xs in slice_vertices(p, &cont_idx, &x) {
            let y = p.evaluate(&xs).expect("dimensions match");
            if !outcomes.iter().any(|o| linalg::max_abs_diff(&o.y, &y) <= 1e-9) {
                outcomes.push(OutcomePoint::new(y, xs));
            }
        }
        // Odometer increment over the integer box.
        for (k, a) in assignment.iter_mut().enumerate() {
            if *a < ranges[k].1 {
                *a += 1;
                break;
            }
            *a = ranges[k].0;
        }
    }

    let enumerated = outcomes.len();
    let nondominated: Vec<OutcomePoint> = outcomes
        .iter()
        .filter(|o| !outcomes.iter().any(|q| dominates(&q.y, &o.y, 0.0)))
        .cloned()
        .collect();
    let ys: Vec<Vec<f64>> = nondominated.iter().map(|o| o.y.clone()).collect();
    let mut points = Vec::new();
    for (i, o) in nondominated.iter().enumerate() {
        let others: Vec<&[f64]> = ys.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, y)| y.as_slice()).collect();
        if let Some(w) = separating_weight(&o.y, &others, SEPARATION_DELTA) {
            let mut pt = o.clone();
            pt.certifying_weight = Some(w);
            points.push(pt);
        }
    }
    Ok(BruteForceResult {
        points,
        enumerated,
        infeasible: enumerated == 0,
    })
}

/// Vertices of `{x_c : (x_int fixed, x_c) feasible}`, returned as full vectors.
fn slice_vertices(p: &Problem, cont: &[usize], fixed: &[f64]) -> Vec<Vec<f64>> {
    let k = cont.len();
    // Each candidate hyperplane is (coefficients over cont, rhs).
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &p.constraints {
        let fixed_part: f64 = (0..fixed.len())
            .filter(|j| !cont.contains(j))
            .map(|j| c.coefficients[j] * fixed[j])
            .sum();
        planes.push((cont.iter().map(|&j| c.coefficients[j]).collect(), c.rhs - fixed_part));
    }
    for (t, &j) in cont.iter().enumerate() {
        let v = &p.variables[j];
        for b in [v.lower, v.upper] {
            if b.is_finite() {
                let mut e = vec![0.0; k];
                e[t] = 1.0;
                planes.push((e, b));
            }
        }
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_subset(planes.len(), k, &mut |subset| {
        let a = subset.iter().map(|&i| planes[i].0.clone()).collect();
        let b = subset.iter().map(|&i| planes[i].1).collect();
        let Some(xc) = (if k == 0 { Some(vec![]) } else { linalg::solve(a, b, 1e-10) }) else {
            return;
        };
        let mut x = fixed.to_vec();
        for (t, &j) in cont.iter().enumerate() {
            x[j] = xc[t];
        }
        if p.is_feasible(&x, TOL_FEAS) && !out.iter().any(|q| linalg::max_abs_diff(q, &x) <= 1e-9) {
            out.push(x);
        }
    });
    out
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// A weight `w` in the unit simplex with `wᵀy <= wᵀy' - delta` for every
/// `y'` in `others`, if one exists. Maximizes the margin rather than testing
/// feasibility at `delta` directly, so the answer does not hinge on the LP
/// feasibility tolerance.
pub fn separating_weight(y: &[f64], others: &[&[f64]], delta: f64) -> Option<Vec<f64>> {
    let d = y.len();
    // Variables: w_1..w_d, then the margin t.
    let mut cost = vec![0.0; d + 1];
    cost[d] = -1.0;
    let mut lp = LinearProgram::new(cost);
    lp.upper = vec![1.0; d + 1];
    lp.lower[d] = -1.0;
    let mut simplex_row = vec![1.0; d + 1];
    simplex_row[d] = 0.0;
    lp.add_row(simplex_row, ConstraintSense::Eq, 1.0);
    for o in others {
        let mut row: Vec<f64> = o.iter().zip(y).map(|(a, b)| a - b).collect();
        let scale = row.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        row.iter_mut().for_each(|v| *v /= scale);
        row.push(-1.0 / scale);
        lp.add_row(row, ConstraintSense::Ge, 0.0);
    }
    match simplex_solve(&lp, &SimplexOptions::default()).ok()?.outcome {
        LpOutcome::Optimal { mut x, value } if -value >= delta => {
            x.truncate(d);
            Some(x)
        }
        _ => None,
    }
}

/// Vertices of `{z : hᵀz <= rhs for all halfspaces}` in `(w̄, a)` space by
/// solving every `d`-subset of the boundary hyperplanes.
pub fn brute_force_vertices(d: usize, halfspaces: &[DualHalfspace], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_subset(halfspaces.len(), d, &mut |subset| {
        let a = subset.iter().map(|&i| halfspaces[i].normal()).collect();
        let b = subset.iter().map(|&i| halfspaces[i].rhs).collect();
        let Some(z) = linalg::solve(a, b, 1e-10) else {
            return;
        };
        if halfspaces.iter().all(|h| h.excess(&z) <= tol) && !out.iter().any(|q| linalg::max_abs_diff(q, &z) <= tol) {
            out.push(z);
        }
    });
    out
}
