//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Variables with arbitrary bounds are shifted/mirrored/split into
//! non-negative columns, finite upper bounds become explicit rows, and
//! every row is brought to a non-negative right-hand side before slack,
//! surplus and artificial columns are added.

use crate::model::ConstraintSense;

use super::OracleError;

/// A single-objective linear program `min cᵀx` over rows and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<LinearRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coefficients: Vec<f64>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl LinearProgram {
    /// LP over `n` variables with bounds `[0, +inf)` and no rows.
    pub fn new(cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            cost,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_row(&mut self, coefficients: Vec<f64>, sense: ConstraintSense, rhs: f64) {
        self.rows.push(LinearRow {
            coefficients,
            sense,
            rhs,
        });
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in &self.rows {
            let act: f64 = r.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match r.sense {
                ConstraintSense::Le => act - r.rhs,
                ConstraintSense::Ge => r.rhs - act,
                ConstraintSense::Eq => (act - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for ((&l, &u), &v) in self.lower.iter().zip(&self.upper).zip(x) {
            worst = worst.max(l - v).max(v - u);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub outcome: LpOutcome,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Pivot limit; `None` uses `10·(n+m)·100` for the standard-form size.
    pub max_pivots: Option<usize>,
    pub pivot_tol: f64,
    pub cost_tol: f64,
    /// Phase-1 objective above this (scaled by the rhs magnitude) means infeasible.
    pub feas_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_pivots: None,
            pivot_tol: 1e-9,
            cost_tol: 1e-9,
            feas_tol: 1e-7,
        }
    }
}

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    /// x = offset + col
    Shift { col: usize, offset: f64 },
    /// x = offset - col
    Mirror { col: usize, offset: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// rows × (cols + 1); last entry is the rhs.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
    max_pivots: usize,
}

enum IterStatus {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.a[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let inv = 1.0 / self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v *= inv;
        }
        self.a[r][c] = 1.0;
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, p) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Reduced-cost row for `cost`, eliminating the current basis.
    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.cols + 1];
        obj[..cost.len()].copy_from_slice(cost);
        for (r, &b) in self.basis.iter().enumerate() {
            let f = obj[b];
            if f != 0.0 {
                for (v, p) in obj.iter_mut().zip(&self.a[r]) {
                    *v -= f * p;
                }
            }
        }
        obj
    }

    /// Primal simplex iterations on `obj` restricted to columns `< allowed`.
    fn iterate(
        &mut self,
        obj: &mut [f64],
        allowed: usize,
        opts: &SimplexOptions,
    ) -> Result<IterStatus, OracleError> {
        loop {
            // Bland: lowest-index improving column.
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -opts.cost_tol) else {
                return Ok(IterStatus::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                let coef = self.a[r][enter];
                if coef > opts.pivot_tol {
                    let ratio = self.rhs(r).max(0.0) / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if ratio < lratio && !tie
                                || tie && self.basis[r] < self.basis[lr]
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(IterStatus::Unbounded);
            };
            if self.pivots >= self.max_pivots {
                return Err(OracleError::Numerical(format!(
                    "simplex exceeded {} pivots",
                    self.max_pivots
                )));
            }
            self.pivot(r, enter, obj);
        }
    }
}

/// Solves `lp` to optimality, or proves it infeasible or unbounded.
pub fn simplex_solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, OracleError> {
    let n = lp.num_vars();
    if lp.lower.len() != n || lp.upper.len() != n || lp.rows.iter().any(|r| r.coefficients.len() != n) {
        return Err(OracleError::Numerical("inconsistent LP dimensions".into()));
    }
    let infeasible = || {
        Ok(LpSolution {
            outcome: LpOutcome::Infeasible,
            pivots: 0,
        })
    };
    for (&l, &u) in lp.lower.iter().zip(&lp.upper) {
        if l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
            return infeasible();
        }
    }

    // Column mapping for the structural variables.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let m = if l.is_finite() {
            ncols += 1;
            ColumnMap::Shift { col: ncols - 1, offset: l }
        } else if u.is_finite() {
            ncols += 1;
            ColumnMap::Mirror { col: ncols - 1, offset: u }
        } else {
            ncols += 2;
            ColumnMap::Split { pos: ncols - 2, neg: ncols - 1 }
        };
        maps.push(m);
    }
    let nstruct = ncols;

    // Rows over structural columns: (coefs, sense, rhs).
    let mut rows: Vec<(Vec<f64>, ConstraintSense, f64)> = Vec::new();
    let translate = |coefs: &[f64], rhs: f64| {
        let mut out = vec![0.0; nstruct];
        let mut rhs = rhs;
        for (j, &a) in coefs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                ColumnMap::Shift { col, offset } => {
                    out[col] += a;
                    rhs -= a * offset;
                }
                ColumnMap::Mirror { col, offset } => {
                    out[col] -= a;
                    rhs -= a * offset;
                }
                ColumnMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, rhs)
    };
    for r in &lp.rows {
        let (coefs, rhs) = translate(&r.coefficients, r.rhs);
        rows.push((coefs, r.sense, rhs));
    }
    for j in 0..n {
        if let ColumnMap::Shift { col, offset } = maps[j] {
            if lp.upper[j].is_finite() {
                let mut coefs = vec![0.0; nstruct];
                coefs[col] = 1.0;
                rows.push((coefs, ConstraintSense::Le, lp.upper[j] - offset));
            }
        }
    }
    let cost = {
        let mut c = vec![0.0; nstruct];
        for (j, &cj) in lp.cost.iter().enumerate() {
            match maps[j] {
                ColumnMap::Shift { col, .. } => c[col] += cj,
                ColumnMap::Mirror { col, .. } => c[col] -= cj,
                ColumnMap::Split { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
            }
        }
        c
    };

    // Normalize to rhs >= 0.
    for (coefs, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for v in coefs.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *sense = match *sense {
                ConstraintSense::Le => ConstraintSense::Ge,
                ConstraintSense::Ge => ConstraintSense::Le,
                ConstraintSense::Eq => ConstraintSense::Eq,
            };
        }
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != ConstraintSense::Eq).count();
    let nart = rows.iter().filter(|r| r.1 != ConstraintSense::Le).count();
    let cols = nstruct + nslack + nart;
    let art_start = nstruct + nslack;
    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut t) = (nstruct, art_start);
    for (i, (coefs, sense, rhs)) in rows.iter().enumerate() {
        a[i][..nstruct].copy_from_slice(coefs);
        a[i][cols] = *rhs;
        match sense {
            ConstraintSense::Le => {
                a[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            ConstraintSense::Ge => {
                a[i][s] = -1.0;
                s += 1;
                a[i][t] = 1.0;
                basis[i] = t;
                t += 1;
            }
            ConstraintSense::Eq => {
                a[i][t] = 1.0;
                basis[i] = t;
                t += 1;
            }
        }
    }
    let max_pivots = opts.max_pivots.unwrap_or(10 * (cols + m).max(1) * 100);
    let mut tab = Tableau {
        a,
        basis,
        cols,
        pivots: 0,
        max_pivots,
    };

    // Phase 1.
    if nart > 0 {
        let mut phase1_cost = vec![0.0; cols];
        for c in phase1_cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        let mut obj = tab.objective_row(&phase1_cost);
        tab.iterate(&mut obj, cols, opts)?;
        let infeas = -obj[cols];
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > opts.feas_tol * scale {
            return Ok(LpSolution {
                outcome: LpOutcome::Infeasible,
                pivots: tab.pivots,
            });
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.a.len() {
            if tab.basis[r] >= art_start {
                let col = (0..art_start)
                    .filter(|&j| tab.a[r][j].abs() > opts.pivot_tol)
                    .max_by(|&i, &j| tab.a[r][i].abs().total_cmp(&tab.a[r][j].abs()));
                match col {
                    Some(c) => {
                        tab.pivot(r, c, &mut obj);
                        r += 1;
                    }
                    None => {
                        tab.a.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase 2.
    let mut obj = tab.objective_row(&cost);
    let status = tab.iterate(&mut obj, art_start, opts)?;
    if let IterStatus::Unbounded = status {
        return Ok(LpSolution {
            outcome: LpOutcome::Unbounded,
            pivots: tab.pivots,
        });
    }

    let mut col_vals = vec![0.0; cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        col_vals[b] = tab.rhs(r).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            ColumnMap::Shift { col, offset } => offset + col_vals[col],
            ColumnMap::Mirror { col, offset } => offset - col_vals[col],
            ColumnMap::Split { pos, neg } => col_vals[pos] - col_vals[neg],
        })
        .collect();
    let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        outcome: LpOutcome::Optimal { x, value },
        pivots: tab.pivots,
    })
}
