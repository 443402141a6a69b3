//! Constructive q-monotone approximation from a best approximation of `f^(q)`.
//!
//! With `Q` best for `f^(q)` at degree `< n - q` and error `E`, the shifted
//! `R = Q + E` satisfies `f^(q) <= R <= f^(q) + 2E`. Integrating `R` `q` times
//! with the Taylor data of `f` at `-1` gives `P` with `0 <= (P - f)^(q) <= 2E`,
//! hence `|P - f| <= (2^q / q!) E`. Subtracting the best approximation of
//! `P - f` from degree `< q` leaves `P^(q)` untouched and can only shrink the
//! error.

use serde::{Deserialize, Serialize};

use crate::catalog::{Provenance, TestFunction};
use crate::chebcore::{cheb_grid, check_degree_bound, ChebPoly};
use crate::constrained::{is_co_q_monotone, shape_tolerance, ShapeConstraint, ShapeReport};
use crate::error::{Error, Result};
use crate::extrema::{scan_points, signed_extrema};
use crate::remez::{best_unconstrained, DEFAULT_TOL};

/// Verification grid for the lifted polynomial: `32 * 4 n` intervals.
const VERIFY_FACTOR: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub q: usize,
    pub n: usize,
    /// `E_{n-q}(f^(q))`.
    pub e: f64,
    /// Shift actually applied (larger than `e` after a retry).
    pub e_used: f64,
    /// `||f - P||`.
    pub achieved_error: f64,
    /// `(2^q / q!) E`.
    pub guaranteed_bound: f64,
    /// `||f - P|| / ((2 / q!) E)`; `None` when `E` vanishes.
    pub qfact_ratio: Option<f64>,
    pub shape: ShapeReport,
    pub derivative: Provenance,
    pub retried: bool,
}

fn factorial(q: usize) -> f64 {
    (1..=q).map(|k| k as f64).product()
}

fn sup_residual(f: &TestFunction, p: &ChebPoly) -> f64 {
    let n = p.degree_bound();
    let pts = scan_points((8 * n * n).max(1024), f.kink_points(), 0.5 / n as f64);
    let rf = f.residual_fn(p);
    let r = |x: f64| rf(x);
    let ext = signed_extrema(&r, &pts, f.kink_points());
    ext.iter()
        .map(|e| e.value.abs())
        .chain(pts.iter().map(|&x| r(x).abs()))
        .fold(0.0, f64::max)
}

fn build(f: &TestFunction, q: usize, n: usize, qpoly: &ChebPoly, shift: f64) -> Result<ChebPoly> {
    let mut p = qpoly.add(&ChebPoly::constant(shift));
    for j in (0..q).rev() {
        p = p.integrate(f.derivative_eval(j, -1.0));
    }
    let p = ChebPoly::with_degree_bound(p.coeffs().to_vec(), n)?;
    let pc = p.clone();
    let f2 = f.clone();
    let diff = TestFunction::from_fn("lift_residual", move |x| pc.eval_unchecked(x) - f2.eval(x))
        .with_kinks(f.kink_points().to_vec());
    let corr = best_unconstrained(&diff, q, DEFAULT_TOL)?;
    Ok(p.sub(&corr.polynomial))
}

/// Lifts a best approximation of `f^(q)` to a q-monotone `P` of degree `< n`.
pub fn lift_q_monotone(f: &TestFunction, q: usize, n: usize) -> Result<(ChebPoly, LiftReport)> {
    if q == 0 {
        return Err(Error::param("q", "must be at least 1"));
    }
    if n <= q {
        return Err(Error::param("n", format!("must exceed q = {q}")));
    }
    check_degree_bound(n)?;
    let (g, provenance) = f.derivative(q);
    let qres = best_unconstrained(&g, n - q, DEFAULT_TOL)?;
    let e = qres.error;
    let constraint = ShapeConstraint::new(q, vec![])?;
    let nodes = cheb_grid(VERIFY_FACTOR * n).nodes().to_vec();

    let mut shift = e;
    let mut retried = false;
    loop {
        let p = build(f, q, n, &qres.polynomial, shift)?;
        let tol = shape_tolerance(&p, q, &nodes);
        let shape = is_co_q_monotone(&p, &constraint, nodes.len(), tol);
        if shape.feasible || retried {
            if !shape.feasible {
                return Err(Error::Solver(format!(
                    "lifted polynomial violates q-monotonicity: {:e} at {}",
                    shape.min_signed_value, shape.witness
                )));
            }
            let achieved = sup_residual(f, &p);
            let c = factorial(q);
            let report = LiftReport {
                q,
                n,
                e,
                e_used: shift,
                achieved_error: achieved,
                guaranteed_bound: 2f64.powi(q as i32) / c * e,
                qfact_ratio: (e > 0.0).then(|| achieved / (2.0 / c * e)),
                shape,
                derivative: provenance,
                retried,
            };
            return Ok((p, report));
        }
        shift = e + 10.0 * (-shape.min_signed_value).max(tol);
        retried = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_function, Params};

    #[test]
    fn square_is_reproduced() {
        let f = get_function("monomial", &Params::new().with("k", 2)).unwrap();
        let (p, rep) = lift_q_monotone(&f, 2, 5).unwrap();
        assert!(rep.e <= 1e-12);
        assert!(rep.achieved_error <= 1e-12);
        assert!((p.eval(0.3).unwrap() - 0.09).abs() < 1e-12);
    }

    #[test]
    fn exp_first_order_bound() {
        let f = get_function("exp", &Params::new()).unwrap();
        let (_, rep) = lift_q_monotone(&f, 1, 8).unwrap();
        let e7 = best_unconstrained(&f, 7, DEFAULT_TOL).unwrap().error;
        assert!((rep.e - e7).abs() <= 1e-9 * e7);
        assert!(rep.achieved_error <= 2.0 * e7 + 1e-9);
        assert!(rep.shape.feasible);
    }

    #[test]
    fn exp_third_order_bound() {
        let f = get_function("exp", &Params::new()).unwrap();
        let (_, rep) = lift_q_monotone(&f, 3, 10).unwrap();
        assert!(rep.achieved_error <= 8.0 / 6.0 * rep.e + 1e-9);
        assert!(rep.qfact_ratio.is_some());
    }

    #[test]
    fn rejects_small_n() {
        let f = get_function("exp", &Params::new()).unwrap();
        assert!(lift_q_monotone(&f, 2, 2).is_err());
    }
}
