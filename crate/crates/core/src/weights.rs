//! Weights `phi^alpha`, `delta_n^alpha` and weighted sup-norms of residuals.
//!
//! `phi(x) = sqrt(1 - x^2)` vanishes at both endpoints, so a finite
//! `phi^alpha`-norm forces interpolation at `±1`. `delta_n = phi + 1/n` is
//! strictly positive.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::catalog::{RealFn, TestFunction};
use crate::chebcore::{cheb_grid, ChebPoly, Grid};
use crate::error::{Error, Result};

/// Norm grid density: `32 * degree_bound` Lobatto intervals.
pub const NORM_GRID_FACTOR: usize = 32;

/// A near-endpoint trend ratio above this value flags a probably infinite
/// continuous norm.
pub const TREND_FLAG: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Unweighted,
    PhiAlpha,
    DeltaAlpha,
    Custom,
}

/// Selects the norm `sup |f - P| / w` and the endpoint interpolation flags.
#[derive(Clone)]
pub struct WeightSpec {
    kind: WeightKind,
    alpha: f64,
    n_param: Option<usize>,
    custom: Option<RealFn>,
    label: String,
    interpolate_left: bool,
    interpolate_right: bool,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("n_param", &self.n_param)
            .field("label", &self.label)
            .field("interpolate_left", &self.interpolate_left)
            .field("interpolate_right", &self.interpolate_right)
            .finish()
    }
}

impl Serialize for WeightSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("WeightSpec", 6)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("n_param", &self.n_param)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("interpolate_left", &self.interpolate_left)?;
        st.serialize_field("interpolate_right", &self.interpolate_right)?;
        st.end()
    }
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self::unweighted()
    }
}

impl WeightSpec {
    pub fn unweighted() -> Self {
        Self {
            kind: WeightKind::Unweighted,
            alpha: 0.0,
            n_param: None,
            custom: None,
            label: "unweighted".into(),
            interpolate_left: false,
            interpolate_right: false,
        }
    }

    /// `phi^alpha`; interpolatory at both ends when `alpha > 0`.
    pub fn phi(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: WeightKind::PhiAlpha,
            alpha,
            n_param: None,
            custom: None,
            label: format!("phi^{alpha}"),
            interpolate_left: alpha > 0.0,
            interpolate_right: alpha > 0.0,
        })
    }

    /// `delta_n^alpha`. `n` may be left unset and supplied per degree via
    /// [`WeightSpec::for_degree`].
    pub fn delta(alpha: f64, n: Option<usize>) -> Result<Self> {
        check_alpha(alpha)?;
        if n == Some(0) {
            return Err(Error::param("n", "delta weight needs n >= 1"));
        }
        Ok(Self {
            kind: WeightKind::DeltaAlpha,
            alpha,
            n_param: n,
            custom: None,
            label: format!("delta^{alpha}"),
            interpolate_left: false,
            interpolate_right: false,
        })
    }

    /// A positive weight on (-1, 1), treated as interpolatory at both ends.
    pub fn custom<W>(label: &str, w: W) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: WeightKind::Custom,
            alpha: 0.0,
            n_param: None,
            custom: Some(Arc::new(w)),
            label: label.to_string(),
            interpolate_left: true,
            interpolate_right: true,
        }
    }

    /// Overrides the interpolation flags. Interpolatory kinds with a vanishing
    /// endpoint weight keep the flag at that end.
    pub fn with_interpolation(mut self, left: bool, right: bool) -> Self {
        let forced = matches!(self.kind, WeightKind::Custom)
            || (self.kind == WeightKind::PhiAlpha && self.alpha > 0.0);
        self.interpolate_left = left || forced;
        self.interpolate_right = right || forced;
        self
    }

    /// Fixes the `n` of `delta_n` to the degree bound of the current solve.
    pub fn for_degree(&self, n: usize) -> Self {
        let mut s = self.clone();
        if s.kind == WeightKind::DeltaAlpha {
            s.n_param = Some(n.max(1));
        }
        s
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_param(&self) -> Option<usize> {
        self.n_param
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn interpolate_left(&self) -> bool {
        self.interpolate_left
    }

    pub fn interpolate_right(&self) -> bool {
        self.interpolate_right
    }

    pub fn is_unweighted(&self) -> bool {
        self.kind == WeightKind::Unweighted || (self.kind != WeightKind::Custom && self.alpha == 0.0)
    }

    /// Whether the weight is zero at `-1` (`left`) or `1`.
    pub fn vanishes_at(&self, left: bool) -> bool {
        match self.kind {
            WeightKind::PhiAlpha => self.alpha > 0.0,
            WeightKind::Custom => {
                let w = self.custom.as_ref().expect("custom weight");
                w(if left { -1.0 } else { 1.0 }) <= 0.0
            }
            _ => false,
        }
    }

    /// `w(x)`.
    pub fn weight_value(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0 + crate::chebcore::DOMAIN_SLACK) {
            return Err(Error::Domain(x));
        }
        let x = x.clamp(-1.0, 1.0);
        let phi = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        Ok(match self.kind {
            WeightKind::Unweighted => 1.0,
            WeightKind::PhiAlpha => pow(phi, self.alpha),
            WeightKind::DeltaAlpha => {
                let n = self.n_param.ok_or_else(|| {
                    Error::Config("delta weight needs n_param".into())
                })?;
                pow(phi + 1.0 / n as f64, self.alpha)
            }
            WeightKind::Custom => (self.custom.as_ref().expect("custom weight"))(x),
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("{alpha} must be finite and >= 0")))
    }
}

fn pow(base: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        base.powf(alpha)
    }
}

/// `phi(x) = sqrt(1 - x^2)`.
pub fn phi(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// `delta_n(x) = phi(x) + 1/n`.
pub fn delta_n(x: f64, n: usize) -> f64 {
    phi(x) + 1.0 / n as f64
}

/// `rho_n(x) = delta_n(x) / n`.
pub fn rho_n(x: f64, n: usize) -> f64 {
    delta_n(x, n) / n as f64
}

/// Weighted sup over a grid with the maximizing node and endpoint trends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub argmax: f64,
    /// Quotient at the node closest to `-1` over the quotient at the next one.
    pub left_trend: f64,
    /// Same at `+1`.
    pub right_trend: f64,
    /// A trend ratio exceeds [`TREND_FLAG`].
    pub divergence_flag: bool,
}

/// Default norm grid: Lobatto with `32 n` intervals, minus endpoints where the
/// weight vanishes.
pub fn default_norm_grid(spec: &WeightSpec, degree_bound: usize) -> Grid {
    cheb_grid(NORM_GRID_FACTOR * degree_bound.max(1))
        .without_endpoints(spec.vanishes_at(true), spec.vanishes_at(false))
}

/// `max |r(x)| / w(x)` over the grid nodes.
pub fn weighted_norm_of<R: Fn(f64) -> f64>(residual: R, spec: &WeightSpec, grid: &Grid) -> Result<NormReport> {
    let nodes = grid.nodes();
    if nodes.is_empty() {
        return Err(Error::Config("empty norm grid".into()));
    }
    let mut quot = Vec::with_capacity(nodes.len());
    for &x in nodes {
        let w = spec.weight_value(x)?;
        if !(w > 0.0) {
            return Err(Error::Config(format!("weight vanishes at grid node {x}")));
        }
        quot.push(residual(x).abs() / w);
    }
    let (mut value, mut argmax) = (quot[0], nodes[0]);
    for (&q, &x) in quot.iter().zip(nodes) {
        if q > value {
            value = q;
            argmax = x;
        }
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 1.0 };
    let k = quot.len();
    let (left_trend, right_trend) = if k >= 2 {
        (ratio(quot[0], quot[1]), ratio(quot[k - 1], quot[k - 2]))
    } else {
        (1.0, 1.0)
    };
    Ok(NormReport {
        value,
        argmax,
        left_trend,
        right_trend,
        divergence_flag: left_trend > TREND_FLAG || right_trend > TREND_FLAG,
    })
}

/// `max |f - p| / w` over the grid nodes.
pub fn weighted_residual_norm(f: &TestFunction, p: &ChebPoly, spec: &WeightSpec, grid: &Grid) -> Result<NormReport> {
    weighted_norm_of(|x| f.eval(x) - p.eval_unchecked(x), spec, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weight_value_examples() {
        assert_eq!(WeightSpec::phi(1.0).unwrap().weight_value(0.0).unwrap(), 1.0);
        let d = WeightSpec::delta(1.0, Some(10)).unwrap();
        assert!((d.weight_value(1.0).unwrap() - 0.1).abs() < 1e-15);
        let p2 = WeightSpec::phi(2.0).unwrap();
        assert!((p2.weight_value(0.6).unwrap() - 0.64).abs() < 1e-15);
        assert!(matches!(p2.weight_value(1.5), Err(Error::Domain(_))));
        assert!(WeightSpec::delta(1.0, None).unwrap().weight_value(0.0).is_err());
    }

    #[test]
    fn phi_forces_interpolation() {
        let s = WeightSpec::phi(0.5).unwrap().with_interpolation(false, false);
        assert!(s.interpolate_left() && s.interpolate_right());
        let s = WeightSpec::phi(0.0).unwrap();
        assert!(!s.interpolate_left());
    }

    #[test]
    fn norm_examples() {
        let spec = WeightSpec::phi(2.0).unwrap();
        let grid = default_norm_grid(&spec, 4);
        assert!(!grid.nodes().contains(&1.0));
        let f = TestFunction::from_fn("one_minus_x2", |x| 1.0 - x * x);
        let r = weighted_residual_norm(&f, &ChebPoly::zero(), &spec, &grid).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let sq = TestFunction::from_fn("sq", |x| x * x);
        let u = WeightSpec::unweighted();
        let r = weighted_residual_norm(&sq, &ChebPoly::zero(), &u, &cheb_grid(64)).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.argmax.abs(), 1.0);

        let abs = TestFunction::from_fn("abs", f64::abs);
        let d = WeightSpec::delta(1.0, Some(10)).unwrap();
        let r = weighted_residual_norm(&abs, &ChebPoly::zero(), &d, &cheb_grid(64)).unwrap();
        assert!((r.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_node_is_rejected() {
        let spec = WeightSpec::phi(1.0).unwrap();
        let f = TestFunction::from_fn("x", |x| x);
        assert!(weighted_residual_norm(&f, &ChebPoly::zero(), &spec, &cheb_grid(8)).is_err());
    }

    #[test]
    fn trend_flags_divergence() {
        // residual ~ phi while the weight is phi^3: the quotient blows up
        let spec = WeightSpec::phi(3.0).unwrap();
        let grid = default_norm_grid(&spec, 8);
        let r = weighted_norm_of(phi, &spec, &grid).unwrap();
        assert!(r.divergence_flag);
        let r = weighted_norm_of(|x| phi(x).powi(4), &spec, &grid).unwrap();
        assert!(!r.divergence_flag);
    }

    proptest! {
        #[test]
        fn homogeneous(lambda in -5.0f64..5.0, a in -1.0f64..1.0) {
            let spec = WeightSpec::delta(1.5, Some(7)).unwrap();
            let grid = cheb_grid(50);
            let base = weighted_norm_of(|x| (x - a).sin(), &spec, &grid).unwrap().value;
            let scaled = weighted_norm_of(|x| lambda * (x - a).sin(), &spec, &grid).unwrap().value;
            prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-12 * (1.0 + base));
        }

        #[test]
        fn delta_norm_below_phi_norm(alpha in 0.1f64..3.0, n in 1usize..30, a in -1.0f64..1.0) {
            let phi_spec = WeightSpec::phi(alpha).unwrap();
            let grid = default_norm_grid(&phi_spec, 6);
            let res = |x: f64| (3.0 * x - a).cos();
            let dn = weighted_norm_of(res, &WeightSpec::delta(alpha, Some(n)).unwrap(), &grid).unwrap().value;
            let pn = weighted_norm_of(res, &phi_spec, &grid).unwrap().value;
            prop_assert!(dn <= pn * (1.0 + 1e-14));
        }

        #[test]
        fn delta_norm_monotone_in_alpha(a1 in 0.1f64..2.0, da in 0.0f64..2.0, n in 2usize..30, c in -1.0f64..1.0) {
            let grid = cheb_grid(60);
            let res = |x: f64| (2.0 * x - c).sin();
            let lo = WeightSpec::delta(a1, Some(n)).unwrap();
            let hi = WeightSpec::delta(a1 + da, Some(n)).unwrap();
            let rl = weighted_norm_of(res, &lo, &grid).unwrap();
            let rh = weighted_norm_of(res, &hi, &grid).unwrap();
            if delta_n(rl.argmax, n) < 1.0 {
                prop_assert!(rh.value >= rl.value * (1.0 - 1e-14));
            }
            if delta_n(rh.argmax, n) > 1.0 {
                prop_assert!(rh.value <= rl.value * (1.0 + 1e-14));
            }
        }
    }
}
