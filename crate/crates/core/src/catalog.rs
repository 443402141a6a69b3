//! Test functions with exact derivative evaluators and shape metadata.
//!
//! Every entry is addressable by id plus a string parameter map, which is
//! what the CLI exposes (`--f trunc --param m=2 --param a=0.3`). Asserted
//! shape memberships are checked numerically when the function is built.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chebcore::{cheb_grid, ChebPoly};
use crate::constrained::ShapeConstraint;
use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Degree of the interpolant used for derivatives beyond `r_max`.
pub const APPROX_DERIVATIVE_DEGREE: usize = 40;

const MEMBERSHIP_GRID: usize = 2000;
const MEMBERSHIP_TOL: f64 = 1e-9;

/// Where a derivative evaluator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Approximate,
}

/// String parameters for catalog entries (`k=3`, `ys=0.5,0,-0.5`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    /// Parses `key=value`.
    pub fn insert_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::param(pair, "expected key=value"))?;
        self.0.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::param(key, format!("`{s}` is not a finite number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| Error::param(key, format!("`{s}` is not a non-negative integer"))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => parse_list(s).map_err(|reason| Error::param(key, reason)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }
}

/// Parses a comma-separated list of reals; the empty string is the empty list.
pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect()
}

/// A target function on [-1, 1] with derivative evaluators and metadata.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    description: String,
    params: Params,
    eval: RealFn,
    derivatives: Vec<RealFn>,
    approximate_from: Option<usize>,
    shape_classes: Vec<ShapeConstraint>,
    kink_points: Vec<f64>,
    sobolev_order: Option<usize>,
    poly: Option<ChebPoly>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("r_max", &self.r_max())
            .field("shape_classes", &self.shape_classes)
            .field("kink_points", &self.kink_points)
            .field("sobolev_order", &self.sobolev_order)
            .finish()
    }
}

impl TestFunction {
    /// A bare function with no derivatives and no shape metadata.
    pub fn from_fn<F>(id: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            description: String::new(),
            params: Params::new(),
            eval: Arc::new(f),
            derivatives: Vec::new(),
            approximate_from: None,
            shape_classes: Vec::new(),
            kink_points: Vec::new(),
            sobolev_order: None,
            poly: None,
        }
    }

    /// A polynomial with all derivatives exact.
    pub fn from_poly(id: &str, p: ChebPoly) -> Self {
        let mut derivs: Vec<RealFn> = Vec::new();
        let mut d = p.clone();
        for _ in 0..p.coeffs().len() + 1 {
            d = d.differentiate();
            let dd = d.clone();
            derivs.push(Arc::new(move |x| dd.eval_unchecked(x)));
        }
        let q = p.clone();
        let mut f = Self::from_fn(id, move |x| q.eval_unchecked(x)).with_derivatives(derivs);
        f.poly = Some(p);
        f
    }

    pub fn with_derivatives(mut self, derivatives: Vec<RealFn>) -> Self {
        self.derivatives = derivatives;
        self
    }

    pub fn with_kinks(mut self, mut kinks: Vec<f64>) -> Self {
        kinks.retain(|k| *k > -1.0 && *k < 1.0);
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        self.kink_points = kinks;
        self
    }

    pub fn with_sobolev_order(mut self, order: Option<usize>) -> Self {
        self.sobolev_order = order;
        self
    }

    pub fn with_description(mut self, d: &str) -> Self {
        self.description = d.to_string();
        self
    }

    fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    /// Adds shape classes after checking each one numerically.
    pub fn with_shape_classes(mut self, classes: Vec<ShapeConstraint>) -> Result<Self> {
        for c in &classes {
            let min = self.membership_margin(c);
            if min < -MEMBERSHIP_TOL {
                return Err(Error::Config(format!(
                    "{}: asserted membership in class (q={}, Y={:?}) fails, min signed derivative {min:e}",
                    self.id,
                    c.q(),
                    c.change_points()
                )));
            }
        }
        self.shape_classes = classes;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `f(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Chebyshev representation when `f` is a polynomial.
    pub fn as_poly(&self) -> Option<&ChebPoly> {
        self.poly.as_ref()
    }

    /// `x -> f(x) - p(x)`. Polynomial targets are differenced coefficientwise
    /// first, which avoids cancellation when the residual is tiny.
    pub fn residual_fn(&self, p: &ChebPoly) -> RealFn {
        match &self.poly {
            Some(fp) => {
                let d = fp.sub(p);
                Arc::new(move |x| d.eval_unchecked(x))
            }
            None => {
                let f = self.eval.clone();
                let p = p.clone();
                Arc::new(move |x| f(x) - p.eval_unchecked(x))
            }
        }
    }

    /// Highest derivative with an exact evaluator.
    pub fn r_max(&self) -> usize {
        self.approximate_from.unwrap_or(self.derivatives.len())
    }

    pub fn shape_classes(&self) -> &[ShapeConstraint] {
        &self.shape_classes
    }

    pub fn kink_points(&self) -> &[f64] {
        &self.kink_points
    }

    /// Sobolev order `r` (bounded `f^(r)`); `None` for infinitely smooth entries.
    pub fn sobolev_order(&self) -> Option<usize> {
        self.sobolev_order
    }

    pub fn is_member(&self, c: &ShapeConstraint) -> bool {
        self.shape_classes.iter().any(|s| s == c)
    }

    /// Evaluator for `f^(order)`; `order = 0` is `f` itself.
    pub fn derivative_fn(&self, order: usize) -> (RealFn, Provenance) {
        if order == 0 {
            return (self.eval.clone(), Provenance::Exact);
        }
        if order <= self.derivatives.len() {
            let p = match self.approximate_from {
                Some(r) if order > r => Provenance::Approximate,
                _ => Provenance::Exact,
            };
            return (self.derivatives[order - 1].clone(), p);
        }
        let r = self.derivatives.len();
        let base = self.derivative_fn(r).0;
        let interp = ChebPoly::interpolate(|x| base(x), APPROX_DERIVATIVE_DEGREE)
            .derivative(order - r);
        (
            Arc::new(move |x| interp.eval_unchecked(x)),
            Provenance::Approximate,
        )
    }

    pub fn derivative_eval(&self, order: usize, x: f64) -> f64 {
        self.derivative_fn(order).0(x)
    }

    /// `f^(order)` as a test function in its own right.
    pub fn derivative(&self, order: usize) -> (TestFunction, Provenance) {
        let (eval, prov) = self.derivative_fn(order);
        let r = self.derivatives.len();
        let derivatives: Vec<RealFn> = (order + 1..=r.max(order))
            .filter(|j| *j <= r)
            .map(|j| self.derivatives[j - 1].clone())
            .collect();
        let approx = match (self.approximate_from, prov) {
            (_, Provenance::Approximate) => Some(0),
            (Some(a), _) => Some(a.saturating_sub(order)),
            (None, _) => None,
        };
        let shape_classes = self
            .shape_classes
            .iter()
            .filter(|c| c.q() > order)
            .filter_map(|c| ShapeConstraint::new(c.q() - order, c.change_points().to_vec()).ok())
            .collect();
        let f = TestFunction {
            id: format!("{}^({order})", self.id),
            description: format!("derivative of order {order} of {}", self.id),
            params: self.params.clone(),
            eval,
            derivatives,
            approximate_from: approx,
            shape_classes,
            kink_points: self.kink_points.clone(),
            sobolev_order: self.sobolev_order.map(|s| s.saturating_sub(order)),
            poly: self.poly.as_ref().map(|p| p.derivative(order)),
        };
        (f, prov)
    }

    /// `factor * f`; shape classes survive only for positive factors.
    pub fn scaled(&self, factor: f64) -> TestFunction {
        let eval = self.eval.clone();
        let derivatives = self
            .derivatives
            .iter()
            .map(|d| {
                let d = d.clone();
                Arc::new(move |x| factor * d(x)) as RealFn
            })
            .collect();
        TestFunction {
            id: self.id.clone(),
            description: self.description.clone(),
            params: self.params.clone(),
            eval: Arc::new(move |x| factor * eval(x)),
            derivatives,
            approximate_from: self.approximate_from,
            shape_classes: if factor > 0.0 {
                self.shape_classes.clone()
            } else {
                Vec::new()
            },
            kink_points: self.kink_points.clone(),
            sobolev_order: self.sobolev_order,
            poly: self.poly.as_ref().map(|p| p.scale(factor)),
        }
    }

    /// `f + lambda * g`.
    pub fn blend(&self, other: &TestFunction, lambda: f64) -> Result<TestFunction> {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let r = self.derivatives.len().min(other.derivatives.len());
        let derivatives = (0..r)
            .map(|j| {
                let (a, b) = (self.derivatives[j].clone(), other.derivatives[j].clone());
                Arc::new(move |x| a(x) + lambda * b(x)) as RealFn
            })
            .collect();
        let mut kinks = self.kink_points.clone();
        kinks.extend_from_slice(&other.kink_points);
        let classes = if lambda >= 0.0 {
            self.shape_classes
                .iter()
                .filter(|c| other.is_member(c) && c.q() <= r)
                .cloned()
                .collect()
        } else {
            Vec::new()
        };
        let approx = match (self.approximate_from, other.approximate_from) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(r).min(b.unwrap_or(r))),
        };
        let sob = match (self.sobolev_order, other.sobolev_order) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut out = TestFunction::from_fn(&format!("{}+{}*{}", self.id, lambda, other.id), move |x| {
            f(x) + lambda * g(x)
        })
        .with_derivatives(derivatives)
        .with_kinks(kinks)
        .with_sobolev_order(sob);
        out.approximate_from = approx;
        if let (Some(p), Some(q)) = (&self.poly, &other.poly) {
            out.poly = Some(p.add(&q.scale(lambda)));
        }
        out.with_shape_classes(classes)
    }

    /// Sup of `|f|` on a fine Lobatto grid plus kinks.
    pub fn sup_norm(&self) -> f64 {
        cheb_grid(MEMBERSHIP_GRID)
            .nodes()
            .iter()
            .chain(self.kink_points.iter())
            .map(|&x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }

    /// Minimum of `sigma(x) * f^(q)(x)` on the 2001-point membership grid,
    /// change points excluded.
    pub fn membership_margin(&self, c: &ShapeConstraint) -> f64 {
        let (d, _) = self.derivative_fn(c.q());
        cheb_grid(MEMBERSHIP_GRID)
            .nodes()
            .iter()
            .filter(|x| !c.change_points().contains(x))
            .map(|&x| c.sign_pattern(x) * d(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Piecewise polynomial with interior breakpoints.
#[derive(Debug, Clone)]
struct Piecewise {
    breaks: Vec<f64>,
    pieces: Vec<ChebPoly>,
}

impl Piecewise {
    fn eval(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < x);
        self.pieces[i].eval_unchecked(x)
    }

    fn derivative(&self, order: usize) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|p| p.derivative(order)).collect(),
        }
    }

    /// `F` with `F^(order) = signs[j] * integrand` on piece `j` and zero
    /// derivatives of order `< order` at -1.
    fn signed_primitive(integrand: &ChebPoly, breaks: &[f64], signs: &[f64], order: usize) -> Self {
        let h = (0..order).fold(integrand.clone(), |p, _| p.integrate(0.0));
        let mut pieces = vec![h.scale(signs[0])];
        for (j, &b) in breaks.iter().enumerate() {
            let jump = signs[j + 1] - signs[j];
            let g = h.sub(&h.taylor(b, order));
            let next = pieces[j].add(&g.scale(jump));
            pieces.push(next);
        }
        Self {
            breaks: breaks.to_vec(),
            pieces,
        }
    }

    fn into_test_function(self, id: &str, max_order: usize) -> TestFunction {
        let derivs: Vec<RealFn> = (1..=max_order)
            .map(|k| {
                let d = self.derivative(k);
                Arc::new(move |x| d.eval(x)) as RealFn
            })
            .collect();
        let breaks = self.breaks.clone();
        TestFunction::from_fn(id, move |x| self.eval(x))
            .with_derivatives(derivs)
            .with_kinks(breaks)
    }
}

fn sign_pieces(p: &ChebPoly, breaks: &[f64]) -> Vec<f64> {
    let mut edges = vec![-1.0];
    edges.extend_from_slice(breaks);
    edges.push(1.0);
    edges
        .windows(2)
        .map(|w| {
            let v = p.eval_unchecked(0.5 * (w[0] + w[1]));
            if v < 0.0 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

fn falling(gamma: f64, j: usize) -> f64 {
    (0..j).map(|i| gamma - i as f64).product()
}

fn ascending(mut ys: Vec<f64>) -> Vec<f64> {
    ys.sort_by(f64::total_cmp);
    ys
}

fn interior(name: &str, a: f64) -> Result<f64> {
    if a > -1.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(Error::param(name, format!("{a} is not in (-1, 1)")))
    }
}

fn class(q: usize, ys: Vec<f64>) -> ShapeConstraint {
    ShapeConstraint::new(q, ys).expect("catalog change points are valid")
}

/// Descriptive entry for [`list_catalog`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    /// `(name, default)` pairs.
    pub params: Vec<(String, String)>,
    /// Shape classes of the default instance, as `(q, change points)`.
    pub shape: Vec<(usize, Vec<f64>)>,
}

const ENTRIES: &[(&str, &str, &[(&str, &str)])] = &[
    ("monomial", "x^k, 0 <= k <= 10", &[("k", "3")]),
    ("exp", "exp(x)", &[]),
    ("xabsx", "x|x|", &[]),
    ("abs", "|x|", &[]),
    ("abs_power", "|x - a|^gamma, gamma >= 1", &[("a", "0"), ("gamma", "1.5")]),
    ("trunc", "truncated power (x - a)_+^m, m in {1,2,3}", &[("m", "1"), ("a", "0")]),
    ("endpoint_power", "(x + 1)^gamma, gamma > 0", &[("gamma", "1.5")]),
    (
        "signed_primitive",
        "q-fold antiderivative of prod (x - y_i) (polynomial member of the co-q-monotone class)",
        &[("q", "1"), ("ys", "0")],
    ),
    (
        "abs_primitive",
        "q-fold antiderivative of |prod (x - y_i)| (non-polynomial q-monotone member)",
        &[("q", "1"), ("ys", "0")],
    ),
    (
        "op117",
        "x^5/20 - x^3/24 + eps * g with g'' = p|p|, p = x(x^2 - 1/4)",
        &[("eps", "0")],
    ),
    (
        "q3_family",
        "antiderivative of (x - y)|x - y|; third derivative has the sign of x - y",
        &[("y", "0")],
    ),
    ("blend", "f + lambda * g for catalog ids f, g at default parameters", &[("f", "exp"), ("g", "abs"), ("lambda", "0.1")]),
];

/// All catalog entries in a stable order.
pub fn list_catalog() -> Vec<CatalogEntry> {
    ENTRIES
        .iter()
        .map(|(id, desc, params)| {
            let shape = get_function(id, &Params::new())
                .map(|f| {
                    f.shape_classes()
                        .iter()
                        .map(|c| (c.q(), c.change_points().to_vec()))
                        .collect()
                })
                .unwrap_or_default();
            CatalogEntry {
                id: id.to_string(),
                description: desc.to_string(),
                params: params
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
                shape,
            }
        })
        .collect()
}

/// Ids of entries whose default instance is nondecreasing on [-1, 1].
pub fn monotone_ids() -> Vec<String> {
    list_catalog()
        .into_iter()
        .filter(|e| e.shape.iter().any(|(q, ys)| *q == 1 && ys.is_empty()))
        .map(|e| e.id)
        .collect()
}

/// Builds a catalog function.
pub fn get_function(id: &str, params: &Params) -> Result<TestFunction> {
    let entry = ENTRIES
        .iter()
        .find(|(eid, _, _)| *eid == id)
        .ok_or_else(|| Error::UnknownFunction(id.to_string()))?;
    for (key, _) in params.iter() {
        if !entry.2.iter().any(|(k, _)| k == key) {
            return Err(Error::param(key, format!("not a parameter of `{id}`")));
        }
    }
    let f = build(id, params)?;
    Ok(f.with_params(params.clone()).with_description(entry.1))
}

fn build(id: &str, params: &Params) -> Result<TestFunction> {
    match id {
        "monomial" => {
            let k = params.usize_or("k", 3)?;
            if k > 10 {
                return Err(Error::param("k", "must be at most 10"));
            }
            let classes = (1..=4)
                .map(|q| {
                    if q > k || (k - q) % 2 == 0 {
                        class(q, vec![])
                    } else {
                        class(q, vec![0.0])
                    }
                })
                .collect();
            TestFunction::from_poly("monomial", ChebPoly::monomial(k)).with_shape_classes(classes)
        }
        "exp" => {
            let derivs = (0..8).map(|_| Arc::new(f64::exp) as RealFn).collect();
            TestFunction::from_fn("exp", f64::exp)
                .with_derivatives(derivs)
                .with_shape_classes((1..=4).map(|q| class(q, vec![])).collect())
        }
        "xabsx" => TestFunction::from_fn("xabsx", |x| x * x.abs())
            .with_derivatives(vec![
                Arc::new(|x: f64| 2.0 * x.abs()),
                Arc::new(|x: f64| if x > 0.0 { 2.0 } else if x < 0.0 { -2.0 } else { 0.0 }),
            ])
            .with_kinks(vec![0.0])
            .with_sobolev_order(Some(2))
            .with_shape_classes(vec![class(1, vec![]), class(2, vec![0.0])]),
        "abs" => TestFunction::from_fn("abs", f64::abs)
            .with_derivatives(vec![Arc::new(|x: f64| {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })])
            .with_kinks(vec![0.0])
            .with_sobolev_order(Some(1))
            .with_shape_classes(vec![class(1, vec![0.0])]),
        "abs_power" => {
            let a = interior("a", params.f64_or("a", 0.0)?)?;
            let gamma = params.f64_or("gamma", 1.5)?;
            if gamma < 1.0 {
                return Err(Error::param("gamma", "must be at least 1"));
            }
            let r = gamma.floor() as usize;
            let derivs = (1..=r)
                .map(|j| {
                    let c = falling(gamma, j);
                    Arc::new(move |x: f64| {
                        let d = x - a;
                        let s = if d < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
                        if d == 0.0 && gamma - j as f64 == 0.0 {
                            // one-sided values differ only in sign; take the right limit
                            return c;
                        }
                        s * c * d.abs().powf(gamma - j as f64)
                    }) as RealFn
                })
                .collect();
            let mut classes = vec![class(1, vec![a])];
            if r >= 2 {
                classes.push(class(2, vec![]));
            }
            TestFunction::from_fn("abs_power", move |x| (x - a).abs().powf(gamma))
                .with_derivatives(derivs)
                .with_kinks(vec![a])
                .with_sobolev_order(Some(r))
                .with_shape_classes(classes)
        }
        "trunc" => {
            let m = params.usize_or("m", 1)?;
            if !(1..=3).contains(&m) {
                return Err(Error::param("m", "must be 1, 2 or 3"));
            }
            let a = interior("a", params.f64_or("a", 0.0)?)?;
            let derivs = (1..=m)
                .map(|j| {
                    let c = falling(m as f64, j);
                    let e = (m - j) as i32;
                    Arc::new(move |x: f64| if x > a { c * (x - a).powi(e) } else { 0.0 }) as RealFn
                })
                .collect();
            TestFunction::from_fn("trunc", move |x| if x > a { (x - a).powi(m as i32) } else { 0.0 })
                .with_derivatives(derivs)
                .with_kinks(vec![a])
                .with_sobolev_order(Some(m))
                .with_shape_classes((1..=m).map(|q| class(q, vec![])).collect())
        }
        "endpoint_power" => {
            let gamma = params.f64_or("gamma", 1.5)?;
            if gamma <= 0.0 {
                return Err(Error::param("gamma", "must be positive"));
            }
            let r = gamma.floor() as usize;
            let derivs = (1..=r)
                .map(|j| {
                    let c = falling(gamma, j);
                    Arc::new(move |x: f64| c * (x + 1.0).max(0.0).powf(gamma - j as f64)) as RealFn
                })
                .collect();
            TestFunction::from_fn("endpoint_power", move |x| (x + 1.0).max(0.0).powf(gamma))
                .with_derivatives(derivs)
                .with_sobolev_order(Some(r))
                .with_shape_classes((1..=r.min(4)).map(|q| class(q, vec![])).collect())
        }
        "signed_primitive" => {
            let q = params.usize_or("q", 1)?;
            if q == 0 {
                return Err(Error::param("q", "must be at least 1"));
            }
            let ys = params.list_or("ys", &[0.0])?;
            let c = ShapeConstraint::new(q, ys.clone())?;
            let p = ChebPoly::from_roots(&ys);
            let f = (0..q).fold(p, |acc, _| acc.integrate(0.0));
            TestFunction::from_poly("signed_primitive", f).with_shape_classes(vec![c])
        }
        "abs_primitive" => {
            let q = params.usize_or("q", 1)?;
            if q == 0 {
                return Err(Error::param("q", "must be at least 1"));
            }
            let ys = params.list_or("ys", &[0.0])?;
            ShapeConstraint::new(q, ys.clone())?;
            let breaks = ascending(ys.clone());
            let p = ChebPoly::from_roots(&breaks);
            let signs = sign_pieces(&p, &breaks);
            Piecewise::signed_primitive(&p, &breaks, &signs, q)
                .into_test_function("abs_primitive", q + ys.len() + 1)
                .with_sobolev_order(Some(q + 1))
                .with_shape_classes(vec![class(q, vec![])])
        }
        "op117" => {
            let eps = params.f64_or("eps", 0.0)?;
            let base = ChebPoly::new(vec![0.0, 0.75, 0.0, 0.25])
                .scale(-1.0 / 24.0)
                .add(&ChebPoly::new(vec![0.0, 10.0 / 16.0, 0.0, 5.0 / 16.0, 0.0, 1.0 / 16.0]).scale(1.0 / 20.0));
            let change = vec![0.5, 0.0, -0.5];
            let mut classes = vec![class(2, change.clone())];
            if eps == 0.0 {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                classes.push(class(1, vec![r, -r]));
                return TestFunction::from_poly("op117", base).with_shape_classes(classes);
            }
            let breaks = ascending(change);
            let p = ChebPoly::from_roots(&breaks);
            let signs = sign_pieces(&p, &breaks);
            let g = Piecewise::signed_primitive(&p.mul(&p), &breaks, &signs, 2);
            let blended = Piecewise {
                breaks: g.breaks.clone(),
                pieces: g.pieces.iter().map(|gp| base.add(&gp.scale(eps))).collect(),
            };
            blended
                .into_test_function("op117", 9)
                .with_sobolev_order(Some(4))
                .with_shape_classes(if eps > 0.0 { classes } else { Vec::new() })
        }
        "q3_family" => {
            let y = interior("y", params.f64_or("y", 0.0)?)?;
            let h = ChebPoly::from_roots(&[y, y]);
            let breaks = vec![y];
            let signs = vec![-1.0, 1.0];
            Piecewise::signed_primitive(&h, &breaks, &signs, 1)
                .into_test_function("q3_family", 4)
                .with_sobolev_order(Some(3))
                .with_shape_classes(vec![class(1, vec![y]), class(2, vec![]), class(3, vec![y])])
        }
        "blend" => {
            let fid = params.get("f").unwrap_or("exp");
            let gid = params.get("g").unwrap_or("abs");
            if fid == "blend" || gid == "blend" {
                return Err(Error::param("f", "blends do not nest"));
            }
            let lambda = params.f64_or("lambda", 0.1)?;
            let f = get_function(fid, &Params::new())?;
            let g = get_function(gid, &Params::new())?;
            f.blend(&g, lambda)
        }
        _ => Err(Error::UnknownFunction(id.to_string())),
    }
}
