//! Polynomials in the Chebyshev-T basis on [-1, 1].
//!
//! Every approximant in this crate is a [`ChebPoly`]: coefficients `c_0..c_d`
//! of `sum c_k T_k(x)` together with a degree bound `n` (degree `< n`).
//! Working in the T basis keeps the linear-programming columns `T_k(x_j)`
//! bounded by one in magnitude, which is what makes degree 50 usable in
//! double precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported degree bound (`n`, polynomials of degree `< n`).
pub const MAX_DEGREE_BOUND: usize = 51;

/// Slack allowed on `|x| <= 1` before an evaluation is rejected.
pub const DOMAIN_SLACK: f64 = 1e-12;

const TRIM_REL: f64 = 1e-14;

/// A polynomial `sum_k c_k T_k(x)` of degree `< degree_bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    coeffs: Vec<f64>,
    degree_bound: usize,
}

impl ChebPoly {
    /// Builds a polynomial from T-coefficients. The degree bound is
    /// `coeffs.len()`; an empty list becomes the zero polynomial.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        let degree_bound = coeffs.len();
        Self {
            coeffs,
            degree_bound,
        }
    }

    /// Builds a polynomial with an explicit degree bound, padding with zeros.
    pub fn with_degree_bound(mut coeffs: Vec<f64>, degree_bound: usize) -> Result<Self> {
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        let degree_bound = degree_bound.max(1);
        if coeffs.len() > degree_bound {
            return Err(Error::Config(format!(
                "{} coefficients do not fit degree bound {}",
                coeffs.len(),
                degree_bound
            )));
        }
        coeffs.resize(degree_bound, 0.0);
        Ok(Self {
            coeffs,
            degree_bound,
        })
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![value])
    }

    /// `x - a`.
    pub fn linear_factor(a: f64) -> Self {
        Self::new(vec![-a, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Index of the last coefficient that survives trimming.
    pub fn degree(&self) -> usize {
        self.trimmed().coeffs.len() - 1
    }

    /// Drops trailing coefficients below `1e-14 * max|c_i|`.
    pub fn trimmed(&self) -> Self {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut len = self.coeffs.len();
        while len > 1 && self.coeffs[len - 1].abs() <= TRIM_REL * scale {
            len -= 1;
        }
        Self::new(self.coeffs[..len].to_vec())
    }

    /// Clenshaw evaluation. Rejects `|x| > 1 + 1e-12`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain(x));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Clenshaw evaluation without the domain check.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    /// Derivative; the degree bound drops by one (never below one).
    pub fn differentiate(&self) -> Self {
        let n = self.coeffs.len();
        let bound = self.degree_bound.saturating_sub(1).max(1);
        if n <= 1 {
            return Self {
                coeffs: vec![0.0; bound],
                degree_bound: bound,
            };
        }
        // c'_{k-1} = c'_{k+1} + 2k c_k, run downward.
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        d.resize(bound, 0.0);
        Self {
            coeffs: d,
            degree_bound: bound,
        }
    }

    /// The `order`-th derivative.
    pub fn derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.differentiate())
    }

    /// Antiderivative `F` with `F(-1) = value_at_minus1`; degree bound grows by one.
    pub fn integrate(&self, value_at_minus1: f64) -> Self {
        let n = self.coeffs.len();
        let c = |k: usize| if k < n { self.coeffs[k] } else { 0.0 };
        let mut out = vec![0.0; n + 1];
        // Integral of T_0 is T_1; for k >= 1: T_{k+1}/(2(k+1)) - T_{k-1}/(2(k-1)).
        for k in 1..=n {
            let upper = if k >= 2 { c(k - 1) } else { 2.0 * c(0) };
            out[k] = (upper - c(k + 1)) / (2.0 * k as f64);
        }
        // Fix the constant: T_k(-1) = (-1)^k.
        let at_minus1: f64 = out
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
            .sum();
        out[0] = value_at_minus1 - at_minus1;
        let bound = self.degree_bound + 1;
        out.resize(bound.max(out.len()), 0.0);
        Self {
            coeffs: out,
            degree_bound: bound,
        }
    }

    /// Product with `x - a` (degree bound grows by one).
    pub fn mul_linear(&self, a: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] -= a * c;
            // x T_k = (T_{k+1} + T_{|k-1|}) / 2, with x T_0 = T_1.
            if k == 0 {
                out[1] += c;
            } else {
                out[k + 1] += 0.5 * c;
                out[k - 1] += 0.5 * c;
            }
        }
        Self {
            coeffs: out,
            degree_bound: self.degree_bound + 1,
        }
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.coeffs, &other.coeffs);
        let mut out = vec![0.0; a.len() + b.len() - 1];
        // T_i T_j = (T_{i+j} + T_{|i-j|}) / 2
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                let p = 0.5 * ai * bj;
                out[i + j] += p;
                out[i.abs_diff(j)] += p;
            }
        }
        let bound = self.degree_bound + other.degree_bound - 1;
        out.resize(bound.max(out.len()), 0.0);
        Self {
            coeffs: out,
            degree_bound: bound,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            degree_bound: self.degree_bound,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Self {
            coeffs: (0..len)
                .map(|k| get(&self.coeffs, k) + get(&other.coeffs, k))
                .collect(),
            degree_bound: self.degree_bound.max(other.degree_bound),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `x^k` with exact coefficients `2^(1-k) C(k, j)` on `T_{k-2j}`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        let scale = 2f64.powi(1 - k as i32);
        let mut binom = 1.0;
        for j in 0..=k / 2 {
            let v = if 2 * j == k { 0.5 * binom } else { binom };
            c[k - 2 * j] = scale * v;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        if k == 0 {
            c[0] = 1.0;
        }
        Self::new(c)
    }

    /// Product `prod_i (x - roots[i])`.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::constant(1.0), |p, &r| p.mul_linear(r))
    }

    /// Taylor polynomial of `self` about `center` with `terms` terms
    /// (`sum_{j<terms} p^(j)(center) (x-center)^j / j!`).
    pub fn taylor(&self, center: f64, terms: usize) -> Self {
        let mut out = Self::zero();
        let mut power = Self::constant(1.0);
        let mut deriv = self.clone();
        let mut factorial = 1.0;
        for j in 0..terms {
            if j > 0 {
                factorial *= j as f64;
                deriv = deriv.differentiate();
                power = power.mul_linear(center);
            }
            out = out.add(&power.scale(deriv.eval_unchecked(center) / factorial));
        }
        out
    }

    /// Interpolant of degree `<= m` at the `m + 1` Chebyshev-Lobatto nodes.
    pub fn interpolate<F: Fn(f64) -> f64>(f: F, m: usize) -> Self {
        let m = m.max(1);
        let values: Vec<f64> = (0..=m).map(|j| f((j as f64 * PI / m as f64).cos())).collect();
        let mf = m as f64;
        let coeffs = (0..=m)
            .map(|k| {
                let sum: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                        // cos(jk pi / m), reduced mod 2m for accuracy
                        let arg = ((j * k) % (2 * m)) as f64 * PI / mf;
                        w * v * arg.cos()
                    })
                    .sum();
                let scale = if k == 0 || k == m { 1.0 / mf } else { 2.0 / mf };
                scale * sum
            })
            .collect();
        Self::new(coeffs)
    }

    /// Max of `|p|` over a grid.
    pub fn max_abs_on(&self, nodes: &[f64]) -> f64 {
        nodes
            .iter()
            .map(|&x| self.eval_unchecked(x).abs())
            .fold(0.0, f64::max)
    }
}

/// Backward recurrence `b_k = c_k + 2x b_{k+1} - b_{k+2}`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `T_0(x), ..., T_{n-1}(x)` by the three-term recurrence.
pub fn cheb_t_values(x: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    if n == 0 {
        return;
    }
    out.push(1.0);
    if n > 1 {
        out.push(x);
    }
    for k in 2..n {
        let next = 2.0 * x * out[k - 1] - out[k - 2];
        out.push(next);
    }
}

/// Dense matrix `D` (row-major, `n x n`) with `(p^(q))_j = sum_k D[j][k] c_k`.
pub fn derivative_matrix(n: usize, q: usize) -> Vec<Vec<f64>> {
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut unit = vec![0.0; n];
        unit[k] = 1.0;
        let d = ChebPoly::new(unit).derivative(q);
        let mut col = d.coeffs().to_vec();
        col.resize(n, 0.0);
        columns.push(col);
    }
    (0..n)
        .map(|j| (0..n).map(|k| columns[k][j]).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    ChebyshevLobatto,
    Uniform,
    Custom,
}

/// Sorted, duplicate-free nodes in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    kind: GridKind,
    includes_endpoints: bool,
}

impl Grid {
    pub fn custom(mut nodes: Vec<f64>) -> Result<Self> {
        if nodes.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err(Error::Config("grid node outside [-1, 1]".into()));
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let includes_endpoints =
            nodes.first() == Some(&-1.0) && nodes.last() == Some(&1.0);
        Ok(Self {
            nodes,
            kind: GridKind::Custom,
            includes_endpoints,
        })
    }

    pub fn uniform(points: usize) -> Self {
        let points = points.max(2);
        let h = 2.0 / (points - 1) as f64;
        let mut nodes: Vec<f64> = (0..points).map(|j| -1.0 + j as f64 * h).collect();
        nodes[points - 1] = 1.0;
        Self {
            nodes,
            kind: GridKind::Uniform,
            includes_endpoints: true,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn includes_endpoints(&self) -> bool {
        self.includes_endpoints
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same grid with the requested endpoints removed.
    pub fn without_endpoints(&self, left: bool, right: bool) -> Self {
        let nodes: Vec<f64> = self
            .nodes
            .iter()
            .copied()
            .filter(|&x| !(left && x == -1.0) && !(right && x == 1.0))
            .collect();
        Self {
            includes_endpoints: self.includes_endpoints && !left && !right,
            nodes,
            kind: self.kind,
        }
    }

    /// Union with extra nodes (clamped to [-1, 1]).
    pub fn with_extra(&self, extra: &[f64]) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend(extra.iter().map(|x| x.clamp(-1.0, 1.0)));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        Self {
            nodes,
            kind: GridKind::Custom,
            includes_endpoints: self.includes_endpoints,
        }
    }
}

/// The `m + 1` Chebyshev-Lobatto nodes `cos(j pi / m)`, ascending.
pub fn cheb_grid(m: usize) -> Grid {
    let m = m.max(1);
    let mut nodes: Vec<f64> = (0..=m)
        .map(|j| -((j as f64 * PI / m as f64).cos()))
        .collect();
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    // symmetric nodes: force exact zero at the centre and exact symmetry
    for j in 0..=m / 2 {
        let v = 0.5 * (nodes[m - j] - nodes[j]);
        nodes[j] = -v;
        nodes[m - j] = v;
    }
    if m % 2 == 0 {
        nodes[m / 2] = 0.0;
    }
    Grid {
        nodes,
        kind: GridKind::ChebyshevLobatto,
        includes_endpoints: true,
    }
}

pub(crate) fn check_degree_bound(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("degree bound must be at least 1".into()));
    }
    if n > MAX_DEGREE_BOUND {
        return Err(Error::DegreeCap {
            requested: n,
            cap: MAX_DEGREE_BOUND,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_matches_powers() {
        for k in 0..=20 {
            let p = ChebPoly::monomial(k);
            for x in [-1.0, -0.7, 0.0, 0.3, 1.0f64] {
                assert!((p.eval(x).unwrap() - x.powi(k as i32)).abs() < 1e-14, "k={k} x={x}");
            }
        }
    }
    use approx::assert_abs_diff_eq;

    /// Monomial-basis reference: T_k as monomial coefficients.
    fn monomial_of_t(k: usize) -> Vec<f64> {
        let mut t0 = vec![1.0];
        let mut t1 = vec![0.0, 1.0];
        if k == 0 {
            return t0;
        }
        for _ in 1..k {
            let mut t2 = vec![0.0; t1.len() + 1];
            for (i, c) in t1.iter().enumerate() {
                t2[i + 1] += 2.0 * c;
            }
            for (i, c) in t0.iter().enumerate() {
                t2[i] -= c;
            }
            t0 = t1;
            t1 = t2;
        }
        t1
    }

    fn to_monomial(p: &ChebPoly) -> Vec<f64> {
        let mut out = vec![0.0; p.coeffs().len()];
        for (k, c) in p.coeffs().iter().enumerate() {
            for (i, m) in monomial_of_t(k).iter().enumerate() {
                out[i] += c * m;
            }
        }
        out
    }

    fn horner(m: &[f64], x: f64) -> f64 {
        m.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    #[test]
    fn clenshaw_examples() {
        assert_eq!(ChebPoly::new(vec![0.0, 0.0, 1.0]).eval(0.0).unwrap(), -1.0);
        assert_eq!(ChebPoly::new(vec![1.0]).eval(0.3).unwrap(), 1.0);
        let cube = ChebPoly::new(vec![0.0, 0.75, 0.0, 0.25]);
        assert_abs_diff_eq!(cube.eval(0.5).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_outside_domain() {
        let p = ChebPoly::new(vec![1.0, 2.0]);
        assert!(matches!(p.eval(1.1), Err(Error::Domain(_))));
        assert!(p.eval(1.0 + 1e-13).is_ok());
    }

    #[test]
    fn differentiate_examples() {
        let d = ChebPoly::new(vec![0.0, 0.0, 1.0]).differentiate();
        assert_eq!(d.coeffs(), &[0.0, 4.0]);
        let d = ChebPoly::new(vec![5.0]).differentiate();
        assert_eq!(d.coeffs(), &[0.0]);
        assert_eq!(d.degree_bound(), 1);
    }

    #[test]
    fn differentiate_matches_monomial_oracle() {
        let cube = ChebPoly::new(vec![0.0, 0.75, 0.0, 0.25]);
        let d = cube.differentiate();
        for i in 0..20 {
            let x = -1.0 + 2.0 * i as f64 / 19.0;
            assert_abs_diff_eq!(d.eval(x).unwrap(), 3.0 * x * x, epsilon = 1e-12);
        }
        // random-ish degree 12 polynomial against monomial differentiation
        let p = ChebPoly::new((0..13).map(|k| ((k * 7 % 5) as f64 - 2.0) / (k + 1) as f64).collect());
        let m = to_monomial(&p);
        let dm: Vec<f64> = m.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
        let dp = p.differentiate();
        for i in 0..20 {
            let x = -1.0 + 2.0 * i as f64 / 19.0;
            assert_abs_diff_eq!(dp.eval(x).unwrap(), horner(&dm, x), epsilon = 1e-10);
        }
    }

    #[test]
    fn integrate_examples() {
        let f = ChebPoly::new(vec![0.0, 4.0]).integrate(0.0);
        assert_abs_diff_eq!(f.coeffs()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.coeffs()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.coeffs()[2], 1.0, epsilon = 1e-15);
        let c = ChebPoly::zero().integrate(2.5);
        assert_abs_diff_eq!(c.eval(0.3).unwrap(), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.trimmed().coeffs()[0], 2.5, epsilon = 1e-15);
        assert_eq!(c.trimmed().coeffs().len(), 1);
    }

    #[test]
    fn integrate_sets_value_at_minus_one() {
        let p = ChebPoly::new(vec![0.3, -1.0, 2.0, 0.5]);
        let f = p.integrate(-0.7);
        assert_abs_diff_eq!(f.eval(-1.0).unwrap(), -0.7, epsilon = 1e-14);
    }

    #[test]
    fn grid_examples() {
        assert_eq!(cheb_grid(1).nodes(), &[-1.0, 1.0]);
        assert_eq!(cheb_grid(2).nodes(), &[-1.0, 0.0, 1.0]);
        let g = cheb_grid(4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(g.nodes()[1], -h, epsilon = 1e-15);
        assert_abs_diff_eq!(g.nodes()[3], h, epsilon = 1e-15);
        assert!(g.includes_endpoints());
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolate_examples() {
        let p = ChebPoly::interpolate(|x| x * x, 2);
        assert_abs_diff_eq!(p.coeffs()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeffs()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeffs()[2], 0.5, epsilon = 1e-15);

        let t5 = ChebPoly::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = ChebPoly::interpolate(|x| t5.eval_unchecked(x), 5);
        for (k, c) in p.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(*c, if k == 5 { 1.0 } else { 0.0 }, epsilon = 1e-13);
        }

        let p = ChebPoly::interpolate(f64::exp, 20);
        let err = (0..1000)
            .map(|i| -1.0 + 2.0 * i as f64 / 999.0)
            .map(|x| (p.eval(x).unwrap() - x.exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "exp interpolation error {err}");
    }

    #[test]
    fn mul_and_roots() {
        let p = ChebPoly::from_roots(&[0.5, -0.5]);
        for x in [-1.0, -0.3, 0.0, 0.7] {
            assert_abs_diff_eq!(p.eval(x).unwrap(), (x - 0.5) * (x + 0.5), epsilon = 1e-14);
        }
        let q = p.mul(&ChebPoly::new(vec![1.0, 2.0, 3.0]));
        for x in [-0.9, 0.1, 0.8] {
            let expected = p.eval(x).unwrap() * (1.0 + 2.0 * x + 3.0 * (2.0 * x * x - 1.0));
            assert_abs_diff_eq!(q.eval(x).unwrap(), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn taylor_of_cubic_is_exact() {
        let p = ChebPoly::new(vec![0.2, -0.1, 0.4, 0.3]);
        let t = p.taylor(0.3, 4);
        for x in [-1.0, 0.0, 0.5, 1.0] {
            assert_abs_diff_eq!(t.eval(x).unwrap(), p.eval(x).unwrap(), epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_matrix_agrees_with_differentiate() {
        let p = ChebPoly::new(vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6]);
        let d = derivative_matrix(6, 2);
        let direct = p.derivative(2);
        for j in 0..6 {
            let v: f64 = (0..6).map(|k| d[j][k] * p.coeffs()[k]).sum();
            let expect = direct.coeffs().get(j).copied().unwrap_or(0.0);
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn trimming_drops_tiny_tail() {
        let p = ChebPoly::new(vec![1.0, 2.0, 1e-16, 0.0]);
        assert_eq!(p.trimmed().coeffs().len(), 2);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert!(check_degree_bound(51).is_ok());
        assert!(matches!(check_degree_bound(52), Err(Error::DegreeCap { .. })));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-1.0f64..1.0, 1..=len)
        }

        proptest! {
            #[test]
            fn linearity(a in coeffs(21), b in coeffs(21), s in -3.0f64..3.0, t in -3.0f64..3.0, x in -1.0f64..=1.0) {
                let p = ChebPoly::new(a);
                let q = ChebPoly::new(b);
                let combo = p.scale(s).add(&q.scale(t));
                let lhs = combo.eval(x).unwrap();
                let rhs = s * p.eval(x).unwrap() + t * q.eval(x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * 10.0);
            }

            #[test]
            fn integrate_then_differentiate_is_identity(c in proptest::collection::vec(-1.0f64..1.0, 16), v in -2.0f64..2.0) {
                let p = ChebPoly::new(c);
                let back = p.integrate(v).differentiate();
                for (k, orig) in p.coeffs().iter().enumerate() {
                    prop_assert!((back.coeffs()[k] - orig).abs() <= 1e-12);
                }
            }

            #[test]
            fn interpolation_reproduces_polynomials(c in coeffs(20), extra in 0usize..5) {
                let p = ChebPoly::new(c);
                let m = p.coeffs().len() - 1 + extra;
                let q = ChebPoly::interpolate(|x| p.eval_unchecked(x), m.max(1));
                for (k, ck) in q.coeffs().iter().enumerate() {
                    let expect = p.coeffs().get(k).copied().unwrap_or(0.0);
                    prop_assert!((ck - expect).abs() <= 1e-13 * 10.0);
                }
            }
        }
    }
}
