//! Multi-objective problem representation.
//!
//! A [`Problem`] holds `d` objectives `f_i(x) = xᵀP_i x + c_iᵀx`, a list of
//! (possibly quadratic) constraints, and per-variable bounds and integrality.
//! Linear problems simply carry no quadratic terms.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Absolute tolerance for `y = f(x)` witness checks.
pub const TOL_EQ: f64 = 1e-6;
/// Absolute tolerance for constraint, bound and integrality checks of a witness.
pub const TOL_FEAS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl ConstraintSense {
    pub fn symbol(self) -> &'static str {
        match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Eq => "=",
            ConstraintSense::Ge => ">=",
        }
    }
}

/// Quadratic form `xᵀQx` stored as monomial coefficients.
///
/// Key `(i, j)` with `i <= j` maps to the coefficient of `x_i·x_j`. The
/// symmetric matrix entries are therefore `Q_ii = coef(i, i)` and
/// `Q_ij = Q_ji = coef(i, j) / 2` for `i != j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticForm {
    terms: BTreeMap<(usize, usize), f64>,
}

impl QuadraticForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coef · x_i · x_j` to the form.
    pub fn add_term(&mut self, i: usize, j: usize, coef: f64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.terms.entry(key).or_insert(0.0) += coef;
    }

    /// Symmetric matrix entry `Q_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        let coef = self.terms.get(&key).copied().unwrap_or(0.0);
        if i == j {
            coef
        } else {
            coef / 2.0
        }
    }

    /// Monomials `(i, j, coef)` with `i <= j`, in index order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.values().all(|&c| c == 0.0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(&(i, j), &c)| c * x[i] * x[j]).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Variable {
    /// Continuous variable with the default bounds `[0, +inf)`.
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lower: 0.0,
            upper: f64::INFINITY,
            integer: false,
        }
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            integer: true,
        }
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub name: String,
    pub sense: ObjectiveSense,
    pub coefficients: Vec<f64>,
    pub quadratic: Option<QuadraticForm>,
}

impl Objective {
    pub fn minimize(name: impl Into<String>, coefficients: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            sense: ObjectiveSense::Minimize,
            coefficients,
            quadratic: None,
        }
    }

    pub fn maximize(name: impl Into<String>, coefficients: Vec<f64>) -> Self {
        Self {
            sense: ObjectiveSense::Maximize,
            ..Self::minimize(name, coefficients)
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum();
        lin + self.quadratic.as_ref().map_or(0.0, |q| q.eval(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<f64>,
    pub quadratic: Option<QuadraticForm>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(
        name: impl Into<String>,
        coefficients: Vec<f64>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> Self {
        Self {
            name: name.into(),
            coefficients,
            quadratic: None,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum();
        lin + self.quadratic.as_ref().map_or(0.0, |q| q.eval(x))
    }

    /// Amount by which `x` violates this constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            ConstraintSense::Le => (act - self.rhs).max(0.0),
            ConstraintSense::Ge => (self.rhs - act).max(0.0),
            ConstraintSense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A multi-objective (mixed-integer, possibly quadratically constrained) program.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Problem {
    pub name: String,
    pub variables: Vec<Variable>,
    pub objectives: Vec<Objective>,
    pub constraints: Vec<Constraint>,
}

/// A single violated invariant reported by [`Problem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    TooFewObjectives(usize),
    NoVariables,
    ObjectiveLength { objective: String, len: usize },
    ConstraintLength { constraint: String, len: usize },
    QuadraticIndex { owner: String, index: usize },
    NonFinite { owner: String },
    EmptyBounds { variable: String },
    DuplicateName { kind: &'static str, name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::TooFewObjectives(d) => {
                write!(f, "needs >=2 objectives, found {d}")
            }
            Diagnostic::NoVariables => write!(f, "problem has no variables"),
            Diagnostic::ObjectiveLength { objective, len } => {
                write!(f, "objective `{objective}` has {len} coefficients, dimension mismatch")
            }
            Diagnostic::ConstraintLength { constraint, len } => {
                write!(f, "constraint `{constraint}` has {len} coefficients, dimension mismatch")
            }
            Diagnostic::QuadraticIndex { owner, index } => {
                write!(f, "quadratic term of `{owner}` references variable index {index} out of range")
            }
            Diagnostic::NonFinite { owner } => write!(f, "`{owner}` contains a non-finite coefficient"),
            Diagnostic::EmptyBounds { variable } => {
                write!(f, "variable `{variable}` has lower bound above upper bound")
            }
            Diagnostic::DuplicateName { kind, name } => write!(f, "duplicate {kind} name `{name}`"),
        }
    }
}

/// Which objectives were negated by [`Problem::to_minimization`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignRecord {
    pub flipped: Vec<bool>,
}

impl SignRecord {
    pub fn identity(d: usize) -> Self {
        Self {
            flipped: vec![false; d],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.flipped.iter().all(|f| !f)
    }

    /// Maps an outcome vector between minimization and original orientation.
    /// The map is its own inverse.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.flipped)
            .map(|(&v, &f)| if f { -v } else { v })
            .collect()
    }
}

impl Problem {
    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.num_variables() - self.num_integer()
    }

    pub fn is_linear(&self) -> bool {
        self.objectives
            .iter()
            .all(|o| o.quadratic.as_ref().is_none_or(QuadraticForm::is_empty))
            && self
                .constraints
                .iter()
                .all(|c| c.quadratic.as_ref().is_none_or(QuadraticForm::is_empty))
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Checks every structural invariant; an empty result means the problem is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.num_variables();
        if self.objectives.len() < 2 {
            out.push(Diagnostic::TooFewObjectives(self.objectives.len()));
        }
        if n == 0 {
            out.push(Diagnostic::NoVariables);
        }
        let check_quad = |owner: &str, q: &Option<QuadraticForm>, out: &mut Vec<Diagnostic>| {
            if let Some(q) = q {
                if let Some(idx) = q.max_index().filter(|&i| i >= n) {
                    out.push(Diagnostic::QuadraticIndex {
                        owner: owner.to_string(),
                        index: idx,
                    });
                }
                if q.terms().any(|(_, _, c)| !c.is_finite()) {
                    out.push(Diagnostic::NonFinite {
                        owner: owner.to_string(),
                    });
                }
            }
        };
        for o in &self.objectives {
            if o.coefficients.len() != n {
                out.push(Diagnostic::ObjectiveLength {
                    objective: o.name.clone(),
                    len: o.coefficients.len(),
                });
            }
            if o.coefficients.iter().any(|c| !c.is_finite()) {
                out.push(Diagnostic::NonFinite {
                    owner: o.name.clone(),
                });
            }
            check_quad(&o.name, &o.quadratic, &mut out);
        }
        for c in &self.constraints {
            if c.coefficients.len() != n {
                out.push(Diagnostic::ConstraintLength {
                    constraint: c.name.clone(),
                    len: c.coefficients.len(),
                });
            }
            if c.coefficients.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
                out.push(Diagnostic::NonFinite {
                    owner: c.name.clone(),
                });
            }
            check_quad(&c.name, &c.quadratic, &mut out);
        }
        for v in &self.variables {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                out.push(Diagnostic::EmptyBounds {
                    variable: v.name.clone(),
                });
            }
        }
        push_duplicates("variable", self.variables.iter().map(|v| &v.name), &mut out);
        push_duplicates("objective", self.objectives.iter().map(|o| &o.name), &mut out);
        push_duplicates("constraint", self.constraints.iter().map(|c| &c.name), &mut out);
        out
    }

    /// Negates every maximization objective so that all objectives are minimized.
    pub fn to_minimization(&self) -> (Problem, SignRecord) {
        let mut p = self.clone();
        let record = SignRecord {
            flipped: self
                .objectives
                .iter()
                .map(|o| o.sense == ObjectiveSense::Maximize)
                .collect(),
        };
        for (o, &flip) in p.objectives.iter_mut().zip(&record.flipped) {
            if flip {
                negate_objective(o);
                o.sense = ObjectiveSense::Minimize;
            }
        }
        (p, record)
    }

    /// Reverts [`Problem::to_minimization`].
    pub fn restore_senses(&self, record: &SignRecord) -> Problem {
        let mut p = self.clone();
        for (o, &flip) in p.objectives.iter_mut().zip(&record.flipped) {
            if flip {
                negate_objective(o);
                o.sense = ObjectiveSense::Maximize;
            }
        }
        p
    }

    /// `y_i = xᵀP_i x + c_iᵀx` for every objective. Feasibility is not checked.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.num_variables() {
            return Err(ModelError::Dimension {
                expected: self.num_variables(),
                got: x.len(),
            });
        }
        Ok(self.objectives.iter().map(|o| o.eval(x)).collect())
    }

    /// Largest violation of any constraint, bound or integrality requirement.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.num_variables() {
            return Err(ModelError::Dimension {
                expected: self.num_variables(),
                got: x.len(),
            });
        }
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(c.violation(x));
        }
        for (v, &xi) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
            if v.integer {
                worst = worst.max((xi - xi.round()).abs());
            }
        }
        Ok(worst)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x).is_ok_and(|v| v <= tol)
    }
}

fn negate_objective(o: &mut Objective) {
    for c in &mut o.coefficients {
        *c = -*c;
    }
    if let Some(q) = &mut o.quadratic {
        q.scale(-1.0);
    }
}

fn push_duplicates<'a>(
    kind: &'static str,
    names: impl Iterator<Item = &'a String>,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = std::collections::BTreeSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            out.push(Diagnostic::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
}

/// A point in objective space together with a solution that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePoint {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub certifying_weight: Option<Vec<f64>>,
}

impl OutcomePoint {
    pub fn new(y: Vec<f64>, x: Vec<f64>) -> Self {
        Self {
            y,
            x,
            certifying_weight: None,
        }
    }

    /// True when `y` matches `f(x)` within [`TOL_EQ`].
    pub fn is_witnessed_by(&self, p: &Problem) -> bool {
        p.evaluate(&self.x).is_ok_and(|fx| {
            fx.len() == self.y.len() && fx.iter().zip(&self.y).all(|(a, b)| (a - b).abs() <= TOL_EQ)
        })
    }
}

/// `a` weakly dominates `b` and differs from it by more than `tol` somewhere.
pub fn dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + tol) && a.iter().zip(b).any(|(x, y)| *x < *y - tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_obj_lp() -> Problem {
        Problem {
            name: "e1".into(),
            variables: vec![
                Variable::continuous("x").with_bounds(0.0, 1.0),
                Variable::continuous("y").with_bounds(0.0, 1.0),
            ],
            objectives: vec![
                Objective::minimize("o1", vec![1.0, 0.0]),
                Objective::minimize("o2", vec![0.0, 1.0]),
            ],
            constraints: vec![Constraint::new("c1", vec![1.0, 1.0], ConstraintSense::Ge, 1.0)],
        }
    }

    #[test]
    fn validate_well_formed() {
        assert!(two_obj_lp().validate().is_empty());
    }

    #[test]
    fn validate_single_objective() {
        let mut p = two_obj_lp();
        p.objectives.pop();
        let diags = p.validate();
        assert_eq!(diags, vec![Diagnostic::TooFewObjectives(1)]);
        assert!(diags[0].to_string().contains("needs >=2 objectives"));
    }

    #[test]
    fn validate_short_objective() {
        let mut p = two_obj_lp();
        p.objectives[0].coefficients.pop();
        let diags = p.validate();
        assert_eq!(diags.len(), 1);
        assert!(matches!(diags[0], Diagnostic::ObjectiveLength { len: 1, .. }));
        assert!(diags[0].to_string().contains("dimension"));
    }

    #[test]
    fn validate_reports_each_violation() {
        let mut p = two_obj_lp();
        p.variables[0].lower = 2.0;
        p.constraints[0].rhs = f64::NAN;
        p.constraints.push(p.constraints[0].clone());
        assert_eq!(p.validate().len(), 4);
    }

    #[test]
    fn to_minimization_flips_max() {
        let mut p = two_obj_lp();
        p.objectives[0].sense = ObjectiveSense::Maximize;
        let (m, rec) = p.to_minimization();
        assert_eq!(rec.flipped, vec![true, false]);
        assert_eq!(m.objectives[0].coefficients, vec![-1.0, 0.0]);
        assert_eq!(m.objectives[1], p.objectives[1]);
        assert!(m.objectives.iter().all(|o| o.sense == ObjectiveSense::Minimize));
        assert_eq!(m.restore_senses(&rec), p);
    }

    #[test]
    fn to_minimization_identity() {
        let p = two_obj_lp();
        let (m, rec) = p.to_minimization();
        assert!(rec.is_identity());
        assert_eq!(m, p);
    }

    #[test]
    fn to_minimization_negates_quadratic() {
        let mut p = two_obj_lp();
        let mut q = QuadraticForm::new();
        q.add_term(0, 1, 3.0);
        p.objectives[1].quadratic = Some(q);
        p.objectives[1].sense = ObjectiveSense::Maximize;
        let (m, _) = p.to_minimization();
        assert_eq!(m.objectives[1].quadratic.as_ref().unwrap().entry(1, 0), -1.5);
    }

    #[test]
    fn evaluate_linear() {
        assert_eq!(two_obj_lp().evaluate(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(two_obj_lp().evaluate(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn evaluate_quadratic_identity() {
        let mut p = two_obj_lp();
        let mut q = QuadraticForm::new();
        q.add_term(0, 0, 1.0);
        q.add_term(1, 1, 1.0);
        p.objectives[0].coefficients = vec![0.0, 0.0];
        p.objectives[0].quadratic = Some(q);
        assert_eq!(p.evaluate(&[1.0, 2.0]).unwrap()[0], 5.0);
        assert!(!p.is_linear());
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        assert_eq!(
            two_obj_lp().evaluate(&[1.0]),
            Err(ModelError::Dimension { expected: 2, got: 1 })
        );
    }

    #[test]
    fn violation_and_integrality() {
        let mut p = two_obj_lp();
        assert!(p.is_feasible(&[0.5, 0.5], TOL_FEAS));
        assert!(!p.is_feasible(&[0.2, 0.2], TOL_FEAS));
        p.variables[0].integer = true;
        assert!(!p.is_feasible(&[0.5, 0.5], TOL_FEAS));
        assert!(p.is_feasible(&[1.0, 0.0], TOL_FEAS));
    }

    #[test]
    fn quadratic_entries_are_symmetric() {
        let mut q = QuadraticForm::new();
        q.add_term(2, 0, 4.0);
        q.add_term(1, 1, 2.0);
        assert_eq!(q.entry(0, 2), 2.0);
        assert_eq!(q.entry(2, 0), 2.0);
        assert_eq!(q.entry(1, 1), 2.0);
        assert_eq!(q.eval(&[1.0, 1.0, 1.0]), 6.0);
    }

    #[test]
    fn dominance() {
        assert!(dominates(&[0.0, 1.0], &[0.0, 2.0], 1e-9));
        assert!(!dominates(&[0.0, 1.0], &[0.0, 1.0], 1e-9));
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0], 1e-9));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sign_flip_is_involution(c in proptest::collection::vec(-100.0f64..100.0, 6), flips in proptest::collection::vec(any::<bool>(), 3)) {
                let mut p = Problem {
                    name: String::new(),
                    variables: vec![Variable::continuous("a"), Variable::continuous("b")],
                    objectives: (0..3).map(|i| Objective::minimize(format!("o{i}"), c[2*i..2*i+2].to_vec())).collect(),
                    constraints: vec![],
                };
                for (o, f) in p.objectives.iter_mut().zip(&flips) {
                    if *f { o.sense = ObjectiveSense::Maximize; }
                }
                let (m, rec) = p.to_minimization();
                prop_assert_eq!(m.restore_senses(&rec), p.clone());
                let (again, rec2) = m.to_minimization();
                prop_assert!(rec2.is_identity());
                prop_assert_eq!(again, m);
            }

            #[test]
            fn linear_evaluate_is_homogeneous(c in proptest::collection::vec(-10.0f64..10.0, 4), x in proptest::collection::vec(-10.0f64..10.0, 2), alpha in -5.0f64..5.0) {
                let p = Problem {
                    name: String::new(),
                    variables: vec![Variable::continuous("a"), Variable::continuous("b")],
                    objectives: vec![Objective::minimize("o1", c[..2].to_vec()), Objective::minimize("o2", c[2..].to_vec())],
                    constraints: vec![],
                };
                let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
                let y = p.evaluate(&x).unwrap();
                let ya = p.evaluate(&ax).unwrap();
                for (a, b) in y.iter().zip(&ya) {
                    prop_assert!((alpha * a - b).abs() <= 1e-9 * (1.0 + b.abs()));
                }
            }
        }
    }
}
