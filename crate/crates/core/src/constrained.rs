//! Best co-q-monotone approximation by cutting-plane linear programming.
//!
//! The unknowns are the Chebyshev coefficients `c_0..c_{n-1}` and the level
//! `t`. Residual rows `|f(x_j) - P(x_j)| <= t w(x_j)` live on a norm grid;
//! shape rows `sigma(u) P^(q)(u) >= 0` start on a coarse Lobatto grid and are
//! augmented by the worst violators of a dense verification pass until the
//! shape holds within tolerance.

use serde::{Deserialize, Serialize};

use crate::catalog::TestFunction;
use crate::chebcore::{cheb_grid, cheb_t_values, check_degree_bound, derivative_matrix, ChebPoly, Grid};
use crate::error::{Error, Result};
use crate::extrema::{golden_max, scan_points, signed_extrema};
use crate::lp::{lp_solve, LinearProgram, LpRow, RowKind};
use crate::remez::{ActiveSetReport, ApproxResult, Certificate};
use crate::weights::{default_norm_grid, weighted_norm_of, WeightSpec, NORM_GRID_FACTOR};

pub const MAX_ROUNDS: usize = 200;
/// Verification grid density relative to the initial shape grid.
pub const VERIFY_FACTOR: usize = 16;
/// Relative shape tolerance, scaled by `1 + ||P^(q)||`.
pub const SHAPE_TOL: f64 = 1e-10;
/// Default dense grid of [`brute_force_oracle`].
pub const ORACLE_GRID: usize = 8001;

const SHAPE_GRID_FACTOR: usize = 4;

/// The class of polynomials with `sigma(x) P^(q)(x) >= 0`,
/// `sigma(x) = sign prod (x - y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstraint {
    q: usize,
    change_points: Vec<f64>,
}

impl ShapeConstraint {
    /// Change points may be given in any order; they are stored decreasing.
    pub fn new(q: usize, mut change_points: Vec<f64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "must be at least 1"));
        }
        if let Some(y) = change_points.iter().find(|y| !(**y > -1.0 && **y < 1.0)) {
            return Err(Error::param("ys", format!("{y} is not in (-1, 1)")));
        }
        change_points.sort_by(|a, b| b.total_cmp(a));
        if change_points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("ys", "change points must be distinct"));
        }
        Ok(Self { q, change_points })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `y_1 > ... > y_s`.
    pub fn change_points(&self) -> &[f64] {
        &self.change_points
    }

    pub fn s(&self) -> usize {
        self.change_points.len()
    }

    /// `+1` when an even number of change points exceed `x`; ties at a
    /// change point give `+1`.
    pub fn sign_pattern(&self, x: f64) -> f64 {
        if self.change_points.contains(&x) {
            return 1.0;
        }
        let above = self.change_points.iter().filter(|&&y| y > x).count();
        if above % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `-1`, the change points ascending, `1`.
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![-1.0];
        b.extend(self.change_points.iter().rev());
        b.push(1.0);
        b
    }
}

/// Outcome of a grid check of `sigma P^(q) >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub feasible: bool,
    pub min_signed_value: f64,
    pub witness: f64,
    pub tolerance: f64,
}

fn shape_nodes(c: &ShapeConstraint, grid_size: usize) -> Vec<f64> {
    let mut nodes = cheb_grid(grid_size.max(2) - 1).nodes().to_vec();
    let b = c.breakpoints();
    nodes.extend(b.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    nodes.extend_from_slice(c.change_points());
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Checks `sigma(x) p^(q)(x) >= -shape_tol` on a `grid_size`-node Lobatto
/// grid plus the midpoints between consecutive breakpoints.
pub fn is_co_q_monotone(p: &ChebPoly, c: &ShapeConstraint, grid_size: usize, shape_tol: f64) -> ShapeReport {
    let d = p.derivative(c.q());
    let mut min = f64::INFINITY;
    let mut witness = 0.0;
    for x in shape_nodes(c, grid_size) {
        let v = c.sign_pattern(x) * d.eval_unchecked(x);
        if v < min {
            min = v;
            witness = x;
        }
    }
    ShapeReport {
        feasible: min >= -shape_tol,
        min_signed_value: min,
        witness,
        tolerance: shape_tol,
    }
}

/// `1e-10 (1 + max |P^(q)|)` over the given nodes.
pub fn shape_tolerance(p: &ChebPoly, q: usize, nodes: &[f64]) -> f64 {
    SHAPE_TOL * (1.0 + p.derivative(q).max_abs_on(nodes))
}

/// Row builder for the coefficient part of the LP.
struct Rows {
    n: usize,
    dq: Vec<Vec<f64>>,
    t: Vec<f64>,
}

impl Rows {
    fn new(n: usize, q: usize) -> Self {
        Self {
            n,
            dq: if q > 0 { derivative_matrix(n, q) } else { Vec::new() },
            t: Vec::new(),
        }
    }

    fn values(&mut self, x: f64) -> Vec<f64> {
        cheb_t_values(x, self.n, &mut self.t);
        self.t[..self.n].to_vec()
    }

    /// `[T_0^(q)(u), ..., T_{n-1}^(q)(u)]`.
    fn derivative_values(&mut self, u: f64) -> Vec<f64> {
        cheb_t_values(u, self.n, &mut self.t);
        let mut out = vec![0.0; self.n];
        for (j, row) in self.dq.iter().enumerate().take(self.n) {
            let tj = self.t[j];
            if tj == 0.0 {
                continue;
            }
            for (k, v) in row.iter().enumerate().take(self.n) {
                out[k] += v * tj;
            }
        }
        out
    }

    fn residual(&mut self, x: f64, fx: f64, w: f64) -> [LpRow; 2] {
        let v = self.values(x);
        let mut up = v.clone();
        up.push(w);
        let mut down: Vec<f64> = v.iter().map(|c| -c).collect();
        down.push(w);
        [LpRow::ge(up, fx), LpRow::ge(down, -fx)]
    }

    fn interpolation(&mut self, x: f64, fx: f64) -> LpRow {
        let mut v = self.values(x);
        v.push(0.0);
        LpRow::eq(v, fx)
    }

    /// `sigma(u) P^(q)(u) >= 0`, or `None` when the row vanishes.
    fn shape(&mut self, c: &ShapeConstraint, u: f64) -> Option<LpRow> {
        let sg = c.sign_pattern(u);
        let mut v: Vec<f64> = self.derivative_values(u).into_iter().map(|d| sg * d).collect();
        if v.iter().all(|d| d.abs() < 1e-300) {
            return None;
        }
        v.push(0.0);
        Some(LpRow::ge(v, 0.0))
    }

    fn change_point(&mut self, y: f64) -> Option<LpRow> {
        let mut v = self.derivative_values(y);
        if v.iter().all(|d| d.abs() < 1e-300) {
            return None;
        }
        v.push(0.0);
        Some(LpRow::eq(v, 0.0))
    }
}

fn dual_columns(lp: &LinearProgram) -> usize {
    lp.rows
        .iter()
        .map(|r| if r.kind == RowKind::Eq { 2 } else { 1 })
        .sum()
}

/// Builds the LP skeleton shared by the solver and the oracle.
fn base_program(
    f: &TestFunction,
    n: usize,
    constraint: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    rows: &mut Rows,
) -> Result<LinearProgram> {
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(objective);
    if spec.interpolate_left() {
        lp.push(rows.interpolation(-1.0, f.eval(-1.0)));
    }
    if spec.interpolate_right() {
        lp.push(rows.interpolation(1.0, f.eval(1.0)));
    }
    if let Some(c) = constraint {
        for &y in c.change_points() {
            if let Some(r) = rows.change_point(y) {
                lp.push(r);
            }
        }
    }
    Ok(lp)
}

fn push_residuals(lp: &mut LinearProgram, rows: &mut Rows, f: &TestFunction, spec: &WeightSpec, nodes: &[f64]) -> Result<()> {
    for &x in nodes {
        let w = spec.weight_value(x)?;
        if !(w > 0.0) {
            return Err(Error::Config(format!("weight vanishes at norm node {x}")));
        }
        for r in rows.residual(x, f.eval(x), w) {
            lp.push(r);
        }
    }
    Ok(())
}

fn poly_from(x: &[f64], n: usize) -> Result<ChebPoly> {
    ChebPoly::with_degree_bound(x[..n].to_vec(), n)
}

fn validate(n: usize, tol: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "degree bound must be at least 1"));
    }
    check_degree_bound(n)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    Ok(())
}

/// Norm grid nodes for a solve: the weight's default grid plus kinks.
fn norm_nodes(f: &TestFunction, spec: &WeightSpec, n: usize) -> Vec<f64> {
    default_norm_grid(spec, n).with_extra(f.kink_points()).nodes().to_vec()
}

/// Local minima of `sigma P^(q)` on the verification grid, refined by golden
/// section, that fall below `-tol`.
fn shape_violations(p: &ChebPoly, c: &ShapeConstraint, verify: &[f64], tol: f64) -> Vec<f64> {
    let d = p.derivative(c.q());
    let g = |u: f64| c.sign_pattern(u) * d.eval_unchecked(u);
    let vals: Vec<f64> = verify.iter().map(|&u| g(u)).collect();
    let m = verify.len();
    let mut out = Vec::new();
    for i in 0..m {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < m { vals[i + 1] } else { f64::INFINITY };
        if !(vals[i] < left && vals[i] <= right) {
            continue;
        }
        // touching minima dip below zero between nodes, so refine every one
        let (u, v) = if i == 0 || i + 1 == m {
            (verify[i], vals[i])
        } else {
            let neg = |u: f64| -g(u);
            let (u, nv) = golden_max(&neg, verify[i - 1], verify[i + 1]);
            if -nv < vals[i] {
                (u, -nv)
            } else {
                (verify[i], vals[i])
            }
        };
        if v < -tol {
            out.push(u);
        }
    }
    out
}

/// Best approximation of `f` by polynomials of degree `< n` in the shape
/// class `constraint` (or without shape constraint), in the norm of `spec`.
///
/// Unweighted problems refine the residual grid adaptively, so `error` is the
/// sup of the residual located by extremum search and `lower_bound` is the
/// final LP level. Weighted problems use the fixed default grid and report the
/// LP level as both.
pub fn best_constrained(
    f: &TestFunction,
    n: usize,
    constraint: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    tol: f64,
) -> Result<ApproxResult> {
    validate(n, tol)?;
    let spec = spec.for_degree(n);
    let q = constraint.map_or(0, |c| c.q());
    let shaped = constraint.filter(|c| c.q() < n);
    let mut rows = Rows::new(n, q);
    let mut lp = base_program(f, n, shaped, &spec, &mut rows)?;
    let adaptive = spec.is_unweighted();
    let mut norm_pts = norm_nodes(f, &spec, n);
    push_residuals(&mut lp, &mut rows, f, &spec, &norm_pts)?;

    let shape_grid = SHAPE_GRID_FACTOR * n;
    let verify: Vec<f64> = match shaped {
        Some(c) => {
            for u in shape_nodes(c, shape_grid + 1) {
                if let Some(r) = rows.shape(c, u) {
                    lp.push(r);
                }
            }
            shape_nodes(c, VERIFY_FACTOR * shape_grid + 1)
        }
        None => Vec::new(),
    };
    let floor = crate::remez::EXACT_FLOOR * (1.0 + f.sup_norm());
    let kinks = f.kink_points().to_vec();

    let mut basis: Option<Vec<usize>> = None;
    let mut cols_at_basis = 0;
    let mut lp_iterations = 0;
    let mut diagnostics = Vec::new();
    for round in 1..=MAX_ROUNDS {
        let warm = basis.as_deref().filter(|b| b.iter().all(|&j| j < cols_at_basis));
        let sol = lp_solve(&lp, warm)?;
        lp_iterations += sol.iterations;
        cols_at_basis = dual_columns(&lp);
        basis = Some(sol.basis.clone());
        let p = poly_from(&sol.x, n)?;
        let level = sol.x[n].max(0.0);

        let mut added = false;
        let mut shape_report = None;
        if let Some(c) = shaped {
            let stol = shape_tolerance(&p, c.q(), &verify);
            for u in shape_violations(&p, c, &verify, stol) {
                if let Some(r) = rows.shape(c, u) {
                    lp.push(r);
                    added = true;
                }
            }
            shape_report = Some(is_co_q_monotone(&p, c, verify.len(), stol));
        }

        let rf = f.residual_fn(&p);
        let r = |x: f64| rf(x);
        let (error, argmax) = if adaptive {
            let pts = scan_points((8 * n * n).max(NORM_GRID_FACTOR * n), &kinks, 0.5 / n as f64);
            let ext = signed_extrema(&r, &pts, &kinks);
            let limit = level + tol * level.max(floor);
            let mut sup: f64 = 0.0;
            let mut arg = 0.0;
            for e in &ext {
                if e.value.abs() > sup {
                    sup = e.value.abs();
                    arg = e.x;
                }
                if e.value.abs() > limit && !norm_pts.contains(&e.x) {
                    norm_pts.push(e.x);
                    for row in rows.residual(e.x, f.eval(e.x), 1.0) {
                        lp.push(row);
                    }
                    added = true;
                }
            }
            (sup.max(level), arg)
        } else {
            let grid = Grid::custom(norm_pts.clone())?;
            let rep = weighted_norm_of(r, &spec, &grid)?;
            (rep.value, rep.argmax)
        };

        if !added {
            let active_points = sol
                .active_rows()
                .into_iter()
                .filter(|&i| lp.rows[i].coeffs[n] != 0.0)
                .map(|i| residual_row_point(&lp.rows[i], n))
                .collect();
            let _ = argmax;
            return Ok(ApproxResult {
                polynomial: p,
                error: if adaptive { error } else { level },
                lower_bound: level.min(error),
                iterations: round,
                certificate: Certificate::ActiveSet(ActiveSetReport {
                    active_points,
                    shape: shape_report,
                    rounds: round,
                    lp_iterations,
                }),
                converged: true,
                diagnostics,
            });
        }
        if round == MAX_ROUNDS {
            diagnostics.push(format!("cutting-plane loop hit {MAX_ROUNDS} rounds"));
            return Ok(ApproxResult {
                polynomial: p,
                error: if adaptive { error } else { level },
                lower_bound: level.min(error),
                iterations: round,
                certificate: Certificate::ActiveSet(ActiveSetReport {
                    active_points: Vec::new(),
                    shape: shape_report,
                    rounds: round,
                    lp_iterations,
                }),
                converged: false,
                diagnostics,
            });
        }
    }
    unreachable!("loop returns on its last round")
}

/// Recovers the abscissa of a residual row from `T_1(x) = x`.
fn residual_row_point(row: &LpRow, n: usize) -> f64 {
    if n >= 2 {
        let s = row.coeffs[0].signum();
        s * row.coeffs[1]
    } else {
        f64::NAN
    }
}

/// One-shot LP with residual and shape rows on a single fixed Lobatto grid.
/// Independent of the cutting-plane machinery; used as a test oracle.
pub fn brute_force_oracle(
    f: &TestFunction,
    n: usize,
    constraint: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    grid_points: usize,
) -> Result<f64> {
    validate(n, 1.0)?;
    if grid_points < 2001 {
        return Err(Error::param("grid_points", "oracle needs at least 2001 points"));
    }
    let spec = spec.for_degree(n);
    let q = constraint.map_or(0, |c| c.q());
    let shaped = constraint.filter(|c| c.q() < n);
    let mut rows = Rows::new(n, q);
    let mut lp = base_program(f, n, shaped, &spec, &mut rows)?;
    let grid = cheb_grid(grid_points - 1);
    let norm = grid.without_endpoints(spec.vanishes_at(true), spec.vanishes_at(false));
    push_residuals(&mut lp, &mut rows, f, &spec, norm.nodes())?;
    if let Some(c) = shaped {
        for &u in grid.nodes() {
            if let Some(r) = rows.shape(c, u) {
                lp.push(r);
            }
        }
    }
    let sol = lp_solve(&lp, None)?;
    Ok(sol.x[n].max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_function, Params};
    use crate::remez::DEFAULT_TOL;

    fn c(q: usize, ys: &[f64]) -> ShapeConstraint {
        ShapeConstraint::new(q, ys.to_vec()).unwrap()
    }

    fn fun(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TestFunction {
        TestFunction::from_fn("t", f)
    }

    #[test]
    fn sign_pattern_examples() {
        assert_eq!(c(1, &[0.0]).sign_pattern(0.5), 1.0);
        assert_eq!(c(1, &[0.0]).sign_pattern(-0.5), -1.0);
        assert_eq!(c(1, &[0.5, -0.5]).sign_pattern(0.0), -1.0);
        assert_eq!(c(1, &[]).sign_pattern(-0.9), 1.0);
        assert_eq!(c(1, &[0.0]).sign_pattern(0.0), 1.0);
    }

    #[test]
    fn constraint_validation() {
        assert!(ShapeConstraint::new(0, vec![]).is_err());
        assert!(ShapeConstraint::new(1, vec![1.0]).is_err());
        assert!(ShapeConstraint::new(1, vec![0.2, 0.2]).is_err());
        assert_eq!(c(1, &[-0.5, 0.5]).change_points(), &[0.5, -0.5]);
    }

    #[test]
    fn shape_check_examples() {
        let x3 = ChebPoly::new(vec![0.0, 0.75, 0.0, 0.25]);
        assert!(is_co_q_monotone(&x3, &c(1, &[]), 201, 1e-12).feasible);
        let x2 = ChebPoly::new(vec![0.5, 0.0, 0.5]);
        let r = is_co_q_monotone(&x2, &c(1, &[]), 201, 1e-12);
        assert!(!r.feasible && r.witness < 0.0);
        let p = ChebPoly::new(vec![0.0, -0.25, 0.0, 0.25]);
        let y = 3f64.sqrt().recip();
        assert!(is_co_q_monotone(&p, &c(1, &[y, -y]), 201, 1e-12).feasible);
    }

    #[test]
    fn forced_values() {
        let u = WeightSpec::unweighted();
        for n in 1..=10 {
            let r = best_constrained(&fun(|x| -x), n, Some(&c(1, &[])), &u, DEFAULT_TOL).unwrap();
            assert!((r.error - 1.0).abs() < 1e-8, "n={n}: {}", r.error);
        }
        let r = best_constrained(&fun(|x| x * x), 2, Some(&c(1, &[])), &u, DEFAULT_TOL).unwrap();
        assert!((r.error - 0.5).abs() < 1e-9);
        let r = best_constrained(&fun(|x| x * x * x), 4, Some(&c(2, &[0.0])), &u, DEFAULT_TOL).unwrap();
        assert!(r.error <= 1e-10, "{}", r.error);
    }

    #[test]
    fn oracle_forced_values() {
        let u = WeightSpec::unweighted();
        let v = brute_force_oracle(&fun(|x| -x), 4, Some(&c(1, &[])), &u, 2001).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let v = brute_force_oracle(&fun(|x| x * x), 2, Some(&c(1, &[])), &u, 2001).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        assert!(brute_force_oracle(&fun(|x| x), 2, None, &u, 100).is_err());
    }

    #[test]
    fn xabsx_matches_oracle() {
        let f = get_function("xabsx", &Params::new()).unwrap();
        let u = WeightSpec::unweighted();
        let con = c(1, &[]);
        let r = best_constrained(&f, 8, Some(&con), &u, DEFAULT_TOL).unwrap();
        let o = brute_force_oracle(&f, 8, Some(&con), &u, ORACLE_GRID).unwrap();
        assert!((r.error - o).abs() <= 1e-7, "{} vs {o}", r.error);
        assert!(r.converged);
    }

    #[test]
    fn exp_monotone_equals_unconstrained() {
        let f = get_function("exp", &Params::new()).unwrap();
        let u = WeightSpec::unweighted();
        let r = best_constrained(&f, 6, Some(&c(1, &[])), &u, DEFAULT_TOL).unwrap();
        let o = brute_force_oracle(&f, 6, Some(&c(1, &[])), &u, ORACLE_GRID).unwrap();
        let e = crate::remez::best_unconstrained(&f, 6, DEFAULT_TOL).unwrap();
        assert!((r.error - o).abs() <= 1e-7);
        assert!((r.error - e.error).abs() <= 1e-7 * (1.0 + e.error));
    }

    #[test]
    fn interpolation_is_enforced() {
        let f = get_function("exp", &Params::new()).unwrap();
        let spec = WeightSpec::phi(1.0).unwrap();
        let r = best_constrained(&f, 6, Some(&c(1, &[])), &spec, DEFAULT_TOL).unwrap();
        assert!((r.polynomial.eval(1.0).unwrap() - 1f64.exp()).abs() < 1e-9);
        assert!((r.polynomial.eval(-1.0).unwrap() - (-1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn result_passes_fresh_verification() {
        let f = get_function("abs", &Params::new()).unwrap();
        let con = c(2, &[]);
        let r = best_constrained(&f, 9, Some(&con), &WeightSpec::unweighted(), DEFAULT_TOL).unwrap();
        let nodes = cheb_grid(32 * 4 * 9).nodes().to_vec();
        let tol = shape_tolerance(&r.polynomial, 2, &nodes);
        let rep = is_co_q_monotone(&r.polynomial, &con, nodes.len(), tol);
        assert!(rep.feasible, "{rep:?} {:?}", r.certificate);
    }
}
