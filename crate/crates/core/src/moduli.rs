//! Numerical moduli of smoothness `omega_k(f, t)`.

use crate::catalog::TestFunction;
use crate::error::{Error, Result};

/// Ratio between the largest and smallest sampled step.
const STEP_SPAN: f64 = 1e-6;

/// `k`-th forward difference `sum_j (-1)^(k-j) C(k, j) g(x + j h)`.
pub fn forward_difference<G: Fn(f64) -> f64>(g: &G, k: usize, x: f64, h: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=k {
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * g(x + j as f64 * h);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// `sup_{0 < h <= t} sup_x |Delta_h^k g(x)|` over windows `[x, x + k h]`
/// inside [-1, 1], sampled at `resolution` geometric steps and
/// `8 * resolution` uniform positions plus positions that put a kink on every
/// window node.
pub fn omega_k_of<G: Fn(f64) -> f64>(g: &G, kinks: &[f64], k: usize, t: f64, resolution: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if !(t > 0.0) || k as f64 * t > 2.0 {
        return Err(Error::Domain(k as f64 * t));
    }
    if resolution < 64 {
        return Err(Error::param("resolution", "must be at least 64"));
    }
    let ratio = STEP_SPAN.powf(1.0 / (resolution - 1) as f64);
    let xs = 8 * resolution;
    let mut best: f64 = 0.0;
    let mut h = t;
    for _ in 0..resolution {
        let span = k as f64 * h;
        let right = (1.0 - span).max(-1.0);
        let mut try_x = |x: f64| {
            if x >= -1.0 && x <= right {
                best = best.max(forward_difference(g, k, x, h).abs());
            }
        };
        for i in 0..=xs {
            try_x(-1.0 + (right + 1.0) * i as f64 / xs as f64);
        }
        for &kink in kinks {
            for j in 0..=k {
                try_x(kink - j as f64 * h);
            }
        }
        h *= ratio;
    }
    Ok(best)
}

/// `omega_k(f, t)` for a catalog function, with its kinks injected.
pub fn omega_k(f: &TestFunction, k: usize, t: f64, resolution: usize) -> Result<f64> {
    omega_k_of(&|x| f.eval(x), f.kink_points(), k, t, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_function, Params};

    #[test]
    fn forward_difference_of_square() {
        let d = forward_difference(&|x: f64| x * x, 2, 0.3, 0.1);
        assert!((d - 0.02).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let sq = get_function("monomial", &Params::new().with("k", 2)).unwrap();
        let abs = get_function("abs", &Params::new()).unwrap();
        let lin = TestFunction::from_fn("lin", |x| 3.0 * x - 1.0);
        for t in [0.1, 0.5, 1.0] {
            let w = omega_k(&sq, 2, t, 64).unwrap();
            assert!((w - 2.0 * t * t).abs() <= 1e-10 * 2.0 * t * t, "{w}");
            let w = omega_k(&abs, 2, t, 64).unwrap();
            assert!((w - 2.0 * t).abs() <= 1e-12, "{w}");
            assert!(omega_k(&lin, 2, t, 64).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn domain_and_params() {
        let sq = TestFunction::from_fn("sq", |x| x * x);
        assert!(matches!(omega_k(&sq, 3, 0.7, 64), Err(Error::Domain(_))));
        assert!(omega_k(&sq, 2, 0.5, 10).is_err());
    }

    #[test]
    fn monotone_and_bounded() {
        let f = get_function("exp", &Params::new()).unwrap();
        let norm = f.sup_norm();
        let mut prev = 0.0;
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            let w = omega_k(&f, 2, t, 64).unwrap();
            assert!(w + 1e-12 >= prev);
            assert!(w <= 4.0 * norm);
            prev = w;
        }
    }

    #[test]
    fn polynomials_below_order_vanish() {
        let p = TestFunction::from_fn("p", |x| 1.0 + x - 2.0 * x * x);
        assert!(omega_k(&p, 3, 0.5, 64).unwrap() <= 1e-12);
    }
}
