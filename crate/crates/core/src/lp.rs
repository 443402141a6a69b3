//! Dense linear programming for problems with few variables and many rows.
//!
//! The problems solved here have at most ~60 free variables (polynomial
//! coefficients plus the level `t`) and up to 10^5 inequality rows. We solve
//!
//! ```text
//!     minimize  c^T x   subject to  a_i^T x >= b_i  (i in I),  a_i^T x = b_i  (i in E)
//! ```
//!
//! through its dual `max b^T y, sum_i y_i a_i = c, y_I >= 0`, which is in
//! standard form with only `dim(x)` equality rows. A revised simplex over that
//! dual keeps an `m x m` basis (m = number of primal variables), and the
//! primal optimum is read off as the simplex multipliers. Appending primal
//! rows appends dual columns, so an optimal basis stays feasible and can be
//! used as a warm start by cutting-plane loops.
//!
//! Pivoting is deterministic: Dantzig pricing with lowest-index tie breaking,
//! switching to Bland's rule after a run of degenerate pivots.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraints are infeasible")]
    Infeasible,
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("numerically singular basis: {0}")]
    Singular(String),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// `a^T x >= b`
    Ge,
    /// `a^T x = b`
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub kind: RowKind,
}

impl LpRow {
    pub fn ge(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            rhs,
            kind: RowKind::Ge,
        }
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            rhs,
            kind: RowKind::Eq,
        }
    }
}

/// Minimize `objective^T x` over free `x` subject to `rows`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, row: LpRow) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Lagrange multiplier of every row (zero for inactive rows).
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    /// Optimal dual basis, usable as a warm start after appending rows.
    pub basis: Vec<usize>,
}

impl LpSolution {
    /// Rows with a nonzero multiplier.
    pub fn active_rows(&self) -> Vec<usize> {
        self.multipliers
            .iter()
            .enumerate()
            .filter(|(_, y)| y.abs() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

const MAX_ITERATIONS: usize = 200_000;
const DEGENERATE_STREAK: usize = 50;

/// Dual column store: one column per `Ge` row, two per `Eq` row.
struct DualColumns {
    m: usize,
    data: Vec<f64>,
    cost: Vec<f64>,
    row: Vec<usize>,
    sign: Vec<f64>,
    scale: Vec<f64>,
}

impl DualColumns {
    fn build(lp: &LinearProgram) -> Result<Self, LpError> {
        let m = lp.num_vars();
        let mut cols = Self {
            m,
            data: Vec::with_capacity(lp.rows.len() * m),
            cost: Vec::with_capacity(lp.rows.len()),
            row: Vec::new(),
            sign: Vec::new(),
            scale: Vec::new(),
        };
        for (i, r) in lp.rows.iter().enumerate() {
            if r.coeffs.len() != m {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {m}",
                    r.coeffs.len()
                )));
            }
            let norm = r.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
            if !norm.is_finite() || !r.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} is not finite")));
            }
            let signs: &[f64] = match r.kind {
                RowKind::Ge => &[1.0],
                RowKind::Eq => &[1.0, -1.0],
            };
            let s = if norm > 0.0 { 1.0 / norm } else { 0.0 };
            for &sg in signs {
                cols.data.extend(r.coeffs.iter().map(|c| sg * s * c));
                cols.cost.push(sg * s * r.rhs);
                cols.row.push(i);
                cols.sign.push(sg);
                cols.scale.push(s);
            }
        }
        Ok(cols)
    }

    fn len(&self) -> usize {
        self.cost.len()
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }
}

/// Solves the program; `warm_basis` is an optional basis returned by an
/// earlier solve on a prefix of the same rows.
pub fn lp_solve(lp: &LinearProgram, warm_basis: Option<&[usize]>) -> Result<LpSolution, LpError> {
    let m = lp.num_vars();
    if m == 0 {
        return Err(LpError::Malformed("no variables".into()));
    }
    for r in lp.rows.iter().filter(|r| r.coeffs.iter().all(|c| *c == 0.0)) {
        let violated = match r.kind {
            RowKind::Ge => r.rhs > 1e-12,
            RowKind::Eq => r.rhs.abs() > 1e-12,
        };
        if violated {
            return Err(LpError::Infeasible);
        }
    }
    let cols = DualColumns::build(lp)?;
    let mut solver = DualSimplex::new(&cols, &lp.objective);

    let warm_ok = match warm_basis {
        Some(b) if b.len() == m && b.iter().all(|&j| j < cols.len()) => solver.try_warm(b),
        _ => false,
    };
    if !warm_ok {
        solver.phase_one()?;
    }
    solver.phase_two()?;
    let x = solver.multipliers_for(Phase::Two)?;
    let y = solver.basic_values()?;
    let mut multipliers = vec![0.0; lp.rows.len()];
    for (pos, &j) in solver.basis.iter().enumerate() {
        if j < cols.len() {
            multipliers[cols.row[j]] += cols.sign[j] * cols.scale[j] * y[pos];
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        multipliers,
        iterations: solver.iterations,
        basis: solver.basis.clone(),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct DualSimplex<'a> {
    cols: &'a DualColumns,
    rhs: Vec<f64>,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
}

impl<'a> DualSimplex<'a> {
    fn new(cols: &'a DualColumns, c: &[f64]) -> Self {
        let art_sign = c.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
        Self {
            cols,
            rhs: c.to_vec(),
            art_sign,
            basis: Vec::new(),
            iterations: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.cols.len()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        if self.is_artificial(j) {
            let k = j - self.cols.len();
            let mut v = vec![0.0; self.cols.m];
            v[k] = self.art_sign[k];
            v
        } else {
            self.cols.col(j).to_vec()
        }
    }

    fn cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(j) {
                    -1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if self.is_artificial(j) {
                    0.0
                } else {
                    self.cols.cost[j]
                }
            }
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.cols.m;
        let mut data = Vec::with_capacity(m * m);
        for &j in &self.basis {
            data.extend(self.column(j));
        }
        DMatrix::from_column_slice(m, m, &data)
    }

    fn solve_basis(&self, rhs: &[f64]) -> Result<Vec<f64>, LpError> {
        let b = self.basis_matrix();
        b.lu()
            .solve(&DVector::from_column_slice(rhs))
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| LpError::Singular("basis factorization failed".into()))
    }

    fn basic_values(&self) -> Result<Vec<f64>, LpError> {
        self.solve_basis(&self.rhs)
    }

    fn multipliers_for(&self, phase: Phase) -> Result<Vec<f64>, LpError> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(j, phase)).collect();
        self.basis_matrix()
            .transpose()
            .lu()
            .solve(&DVector::from_column_slice(&cb))
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| LpError::Singular("transposed basis factorization failed".into()))
    }

    fn try_warm(&mut self, basis: &[usize]) -> bool {
        self.basis = basis.to_vec();
        match self.basic_values() {
            Ok(v) => {
                let scale = v.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
                if v.iter().all(|x| x.is_finite() && *x >= -1e-9 * scale) {
                    return true;
                }
            }
            Err(_) => {}
        }
        self.basis.clear();
        false
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let n = self.cols.len();
        self.basis = (0..self.cols.m).map(|k| n + k).collect();
        self.iterate(Phase::One)?;
        let values = self.basic_values()?;
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&values)
            .filter(|(j, _)| self.is_artificial(**j))
            .map(|(_, v)| v.abs())
            .sum();
        let scale = self.rhs.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        if infeas > 1e-9 * scale {
            // dual infeasible: the primal has no finite minimum
            return Err(LpError::Unbounded);
        }
        self.drive_out_artificials()
    }

    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        for pos in 0..self.basis.len() {
            if !self.is_artificial(self.basis[pos]) {
                continue;
            }
            let b = self.basis_matrix();
            let lu = b.lu();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                if self.basis.contains(&j) {
                    continue;
                }
                let u = lu
                    .solve(&DVector::from_column_slice(self.cols.col(j)))
                    .ok_or_else(|| LpError::Singular("basis factorization failed".into()))?;
                let mag = u[pos].abs();
                if mag > 1e-7 && best.map_or(true, |(_, b)| mag > b * (1.0 + 1e-12)) {
                    best = Some((j, mag));
                }
            }
            match best {
                Some((j, _)) => self.basis[pos] = j,
                None => {
                    return Err(LpError::Singular(format!(
                        "variable {} is not determined by the constraints",
                        self.basis[pos] - self.cols.len()
                    )))
                }
            }
        }
        Ok(())
    }

    fn phase_two(&mut self) -> Result<(), LpError> {
        self.iterate(Phase::Two)
    }

    fn iterate(&mut self, phase: Phase) -> Result<(), LpError> {
        let n = self.cols.len();
        let m = self.cols.m;
        let mut degenerate_run = 0usize;
        let mut in_basis = vec![false; n + m];
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            in_basis.iter_mut().for_each(|b| *b = false);
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let b = self.basis_matrix();
            let lu = b.clone().lu();
            let xb: Vec<f64> = lu
                .solve(&DVector::from_column_slice(&self.rhs))
                .ok_or_else(|| LpError::Singular("basis factorization failed".into()))?
                .iter()
                .copied()
                .collect();
            let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(j, phase)).collect();
            let pi: Vec<f64> = b
                .transpose()
                .lu()
                .solve(&DVector::from_column_slice(&cb))
                .ok_or_else(|| LpError::Singular("transposed basis factorization failed".into()))?
                .iter()
                .copied()
                .collect();
            let pi_norm = pi.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let tol = 1e-11 * (1.0 + pi_norm);
            let bland = degenerate_run >= DEGENERATE_STREAK;

            // pricing over structural columns only
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n {
                if in_basis[j] {
                    continue;
                }
                let a = self.cols.col(j);
                let d = self.cost(j, phase) - a.iter().zip(&pi).map(|(x, y)| x * y).sum::<f64>();
                if d > tol {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.map_or(true, |(_, best)| d > best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(());
            };

            let u: Vec<f64> = lu
                .solve(&DVector::from_column_slice(self.cols.col(q)))
                .ok_or_else(|| LpError::Singular("basis factorization failed".into()))?
                .iter()
                .copied()
                .collect();
            let u_norm = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let piv_tol = (1e-9 * u_norm).max(1e-11);
            let mut leave: Option<(usize, f64, f64)> = None;
            for (r, (&ur, &xr)) in u.iter().zip(&xb).enumerate() {
                if ur <= piv_tol {
                    continue;
                }
                let theta = xr.max(0.0) / ur;
                let better = match leave {
                    None => true,
                    Some((r0, t0, u0)) => {
                        let tie = (theta - t0).abs() <= 1e-12 * (1.0 + t0.abs());
                        if tie {
                            if bland {
                                self.basis[r] < self.basis[r0]
                            } else {
                                ur > u0
                            }
                        } else {
                            theta < t0
                        }
                    }
                };
                if better {
                    leave = Some((r, theta, ur));
                }
            }
            let Some((r, theta, _)) = leave else {
                return match phase {
                    // the phase-one objective is bounded by zero
                    Phase::One => Err(LpError::Singular("unbounded phase-one ray".into())),
                    Phase::Two => Err(LpError::Infeasible),
                };
            };
            if theta <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.basis[r] = q;
            self.iterations += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_minimax() {
        // variables (a, t): minimize t, t >= 1 - a, t >= a
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        lp.push(LpRow::ge(vec![1.0, 1.0], 1.0));
        lp.push(LpRow::ge(vec![-1.0, 1.0], 0.0));
        let s = lp_solve(&lp, None).unwrap();
        assert_abs_diff_eq!(s.objective, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn two_point_center() {
        // t >= +-(x_j - c), x_j in {0, 1}
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        for xj in [0.0, 1.0] {
            lp.push(LpRow::ge(vec![1.0, 1.0], xj));
            lp.push(LpRow::ge(vec![-1.0, 1.0], -xj));
        }
        let s = lp_solve(&lp, None).unwrap();
        assert_abs_diff_eq!(s.objective, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn equality_rows_are_respected() {
        // minimize t with t >= |a - 1|, t >= |a + 1| and a = 0.25
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        for v in [1.0, -1.0] {
            lp.push(LpRow::ge(vec![1.0, 1.0], v));
            lp.push(LpRow::ge(vec![-1.0, 1.0], -v));
        }
        lp.push(LpRow::eq(vec![1.0, 0.0], 0.25));
        let s = lp_solve(&lp, None).unwrap();
        assert_abs_diff_eq!(s.x[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(s.objective, 1.25, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(LpRow::ge(vec![-1.0], 0.0));
        assert_eq!(lp_solve(&lp, None), Err(LpError::Unbounded));
    }

    #[test]
    fn infeasible_is_reported() {
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        lp.push(LpRow::ge(vec![1.0, 1.0], 0.0));
        lp.push(LpRow::ge(vec![-1.0, 1.0], 0.0));
        lp.push(LpRow::eq(vec![1.0, 0.0], 1.0));
        lp.push(LpRow::eq(vec![1.0, 0.0], 2.0));
        assert_eq!(lp_solve(&lp, None), Err(LpError::Infeasible));
    }

    #[test]
    fn warm_start_after_appending_rows() {
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        for xj in [0.0, 1.0] {
            lp.push(LpRow::ge(vec![1.0, 1.0], xj));
            lp.push(LpRow::ge(vec![-1.0, 1.0], -xj));
        }
        let first = lp_solve(&lp, None).unwrap();
        lp.push(LpRow::ge(vec![1.0, 1.0], 3.0));
        lp.push(LpRow::ge(vec![-1.0, 1.0], -3.0));
        let warm = lp_solve(&lp, Some(&first.basis)).unwrap();
        let cold = lp_solve(&lp, None).unwrap();
        assert_abs_diff_eq!(warm.objective, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cold.objective, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_across_runs() {
        let mut lp = LinearProgram::new(vec![0.0, 0.0, 1.0]);
        for j in 0..41 {
            let x = -1.0 + j as f64 / 20.0;
            let f = (3.0 * x).sin();
            lp.push(LpRow::ge(vec![1.0, x, 1.0], f));
            lp.push(LpRow::ge(vec![-1.0, -x, 1.0], -f));
        }
        let a = lp_solve(&lp, None).unwrap();
        let b = lp_solve(&lp, None).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.basis, b.basis);
    }
}
