//! Best unconstrained uniform approximation by the Remez exchange algorithm.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::TestFunction;
use crate::chebcore::{cheb_t_values, check_degree_bound, ChebPoly};
use crate::constrained::ShapeReport;
use crate::error::{Error, Result};
use crate::extrema::{alternating, scan_points, signed_extrema, Extremum};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100;
/// Relative agreement required between alternation magnitudes and the error.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Residuals below `EXACT_FLOOR * (1 + ||f||)` count as exact reproduction.
pub const EXACT_FLOOR: f64 = 1e-13;

const STALL_LIMIT: usize = 12;

/// Outcome of a best-approximation solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub polynomial: ChebPoly,
    /// Achieved (minimax) error of `polynomial`.
    pub error: f64,
    /// Certified lower bound on the optimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub certificate: Certificate,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

impl ApproxResult {
    /// Degree bound `n` of the problem (the approximant has degree `< n`).
    pub fn degree_bound(&self) -> usize {
        self.polynomial.degree_bound()
    }

    /// `(error - lower_bound) / error`.
    pub fn relative_gap(&self) -> f64 {
        (self.error - self.lower_bound) / self.error.max(1e-300)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Alternation(AlternationReport),
    ActiveSet(ActiveSetReport),
}

/// Equioscillation points of the residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternationReport {
    pub points: Vec<f64>,
    pub signs: Vec<i8>,
    pub values: Vec<f64>,
    /// The residual vanishes to rounding; no alternation is needed.
    pub exact: bool,
}

/// Certificate of a cutting-plane solve: active residual points and the final
/// shape check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSetReport {
    pub active_points: Vec<f64>,
    pub shape: Option<ShapeReport>,
    pub rounds: usize,
    pub lp_iterations: usize,
}

/// Why an alternation certificate could not be produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
pub enum CertificateDefect {
    #[error("found {found} alternation points, need {required}")]
    Count { found: usize, required: usize },
    #[error("signs do not alternate at index {index}")]
    Sign { index: usize },
    #[error("magnitude {value:e} deviates from the error {error:e}")]
    Magnitude { value: f64, error: f64 },
    #[error("result carries no alternation data")]
    NotAlternation,
}

fn solve_reference(f: &TestFunction, reference: &[f64], n: usize) -> Result<(ChebPoly, f64)> {
    let m = n + 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    let mut t = Vec::new();
    for (i, &x) in reference.iter().enumerate() {
        cheb_t_values(x, n, &mut t);
        for k in 0..n {
            a[(i, k)] = t[k];
        }
        a[(i, n)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        b[i] = f.eval(x);
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Solver("singular Remez reference system".into()))?;
    let coeffs: Vec<f64> = sol.iter().take(n).copied().collect();
    Ok((ChebPoly::with_degree_bound(coeffs, n)?, sol[n]))
}

fn scan_size(n: usize) -> usize {
    (8 * n * n).max(512)
}

fn residual_extrema(f: &TestFunction, p: &ChebPoly) -> Vec<Extremum> {
    let n = p.degree_bound();
    let kinks = f.kink_points();
    let pts = scan_points(scan_size(n), kinks, 0.5 / n as f64);
    let r = f.residual_fn(p);
    signed_extrema(&|x| r(x), &pts, kinks)
}

/// Reduces an alternating sequence to `m` points keeping the global maximum,
/// dropping the smaller end each time.
fn trim(mut alt: Vec<Extremum>, m: usize) -> Vec<Extremum> {
    while alt.len() > m {
        let first = alt[0].value.abs();
        let last = alt[alt.len() - 1].value.abs();
        if first < last {
            alt.remove(0);
        } else {
            alt.pop();
        }
    }
    alt
}

/// Single-point exchange: puts `x*` into the reference, preserving the sign
/// alternation of the residual.
fn single_exchange(reference: &[f64], r: &dyn Fn(f64) -> f64, star: Extremum) -> Vec<f64> {
    let mut refs = reference.to_vec();
    let s = star.value.signum();
    let sgn = |x: f64| r(x).signum();
    let pos = refs.partition_point(|&x| x < star.x);
    if pos == 0 {
        if sgn(refs[0]) == s {
            refs[0] = star.x;
        } else {
            refs.insert(0, star.x);
            refs.pop();
        }
    } else if pos == refs.len() {
        let last = refs.len() - 1;
        if sgn(refs[last]) == s {
            refs[last] = star.x;
        } else {
            refs.push(star.x);
            refs.remove(0);
        }
    } else if sgn(refs[pos - 1]) == s {
        refs[pos - 1] = star.x;
    } else {
        refs[pos] = star.x;
    }
    refs
}

/// Best approximation of `f` from polynomials of degree `< n`.
pub fn best_unconstrained(f: &TestFunction, n: usize, tol: f64) -> Result<ApproxResult> {
    if n == 0 {
        return Err(Error::param("n", "degree bound must be at least 1"));
    }
    check_degree_bound(n)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if let Some(fp) = f.as_poly() {
        // E_n(f) = E_n(f - L) for L of degree < n; removing the low part keeps
        // the reference system well scaled when the error is tiny
        let c = fp.coeffs();
        if c.len() > n && c[..n].iter().any(|v| *v != 0.0) {
            let low = ChebPoly::with_degree_bound(c[..n].to_vec(), n)?;
            let mut high = vec![0.0; n];
            high.extend_from_slice(&c[n..]);
            let g = TestFunction::from_poly(f.id(), ChebPoly::new(high)).with_kinks(f.kink_points().to_vec());
            let mut res = best_unconstrained(&g, n, tol)?;
            res.polynomial = ChebPoly::with_degree_bound(res.polynomial.add(&low).coeffs().to_vec(), n)?;
            return Ok(res);
        }
    }
    let fnorm = f.sup_norm();
    let floor = EXACT_FLOOR * (1.0 + fnorm);
    let mut reference: Vec<f64> = (0..=n)
        .map(|i| -(i as f64 * std::f64::consts::PI / n as f64).cos())
        .collect();
    reference[0] = -1.0;
    reference[n] = 1.0;

    let mut best: Option<(ChebPoly, f64, Vec<Extremum>)> = None;
    let mut lower = 0.0f64;
    let mut stall = 0;
    let mut diagnostics = Vec::new();
    let mut iterations = 0;

    for it in 1..=MAX_ITERATIONS {
        iterations = it;
        let (p, h) = solve_reference(f, &reference, n)?;
        let rf = f.residual_fn(&p);
        let r = |x: f64| rf(x);
        let ext = residual_extrema(f, &p);
        let max_err = ext
            .iter()
            .map(|e| e.value.abs())
            .chain(reference.iter().map(|&x| r(x).abs()))
            .fold(0.0, f64::max);
        let alt = alternating(&ext);

        let improved = best.as_ref().is_none_or(|b| max_err < b.1);
        if improved {
            best = Some((p.clone(), max_err, alt.clone()));
            stall = 0;
        } else {
            stall += 1;
        }

        if max_err <= floor {
            let report = AlternationReport {
                points: vec![],
                signs: vec![],
                values: vec![],
                exact: true,
            };
            return Ok(ApproxResult {
                polynomial: p,
                error: max_err,
                lower_bound: 0.0,
                iterations: it,
                certificate: Certificate::Alternation(report),
                converged: true,
                diagnostics,
            });
        }

        let next: Vec<Extremum> = if alt.len() >= n + 1 {
            trim(alt, n + 1)
        } else {
            let star = *ext
                .iter()
                .max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
                .expect("nonempty extrema");
            let refs = single_exchange(&reference, &r, star);
            refs.iter().map(|&x| Extremum { x, value: r(x) }).collect()
        };
        let alternates = next
            .windows(2)
            .all(|w| w[0].value.signum() == -w[1].value.signum() && w[0].value != 0.0);
        if alternates && next.len() == n + 1 {
            let dlvp = next.iter().map(|e| e.value.abs()).fold(f64::INFINITY, f64::min);
            lower = lower.max(dlvp);
        }
        lower = lower.max(h.abs().min(max_err));

        let bmax = best.as_ref().map(|b| b.1).unwrap_or(max_err);
        if bmax - lower <= tol * bmax {
            let (p, e, alt) = best.expect("best exists");
            let points = trim(alt, n + 1);
            return Ok(ApproxResult {
                polynomial: p,
                error: e,
                lower_bound: lower.min(e),
                iterations: it,
                certificate: Certificate::Alternation(report_from(&points, false)),
                converged: true,
                diagnostics,
            });
        }
        if stall >= STALL_LIMIT {
            diagnostics.push(format!(
                "exchange stalled after {it} iterations, relative gap {:e}",
                (bmax - lower) / bmax
            ));
            break;
        }
        let mut xs: Vec<f64> = next.iter().map(|e| e.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() != n + 1 {
            diagnostics.push("reference collapsed".into());
            break;
        }
        reference = xs;
    }

    let (p, e, alt) = best.expect("at least one iteration");
    if diagnostics.is_empty() {
        diagnostics.push(format!("no convergence within {MAX_ITERATIONS} iterations"));
    }
    Ok(ApproxResult {
        polynomial: p,
        error: e,
        lower_bound: lower.min(e),
        iterations,
        certificate: Certificate::Alternation(report_from(&trim(alt, n + 1), false)),
        converged: false,
        diagnostics,
    })
}

fn report_from(points: &[Extremum], exact: bool) -> AlternationReport {
    AlternationReport {
        points: points.iter().map(|e| e.x).collect(),
        signs: points.iter().map(|e| if e.value < 0.0 { -1 } else { 1 }).collect(),
        values: points.iter().map(|e| e.value).collect(),
        exact,
    }
}

/// Re-derives the equioscillation points of a solved problem from scratch and
/// checks count, sign alternation and magnitudes.
pub fn alternation_certificate(result: &ApproxResult, f: &TestFunction) -> std::result::Result<AlternationReport, CertificateDefect> {
    if let Certificate::Alternation(r) = &result.certificate {
        if r.exact {
            return Ok(r.clone());
        }
    } else {
        return Err(CertificateDefect::NotAlternation);
    }
    let n = result.degree_bound();
    let error = result.error;
    let ext = residual_extrema(f, &result.polynomial);
    let near: Vec<Extremum> = ext
        .into_iter()
        .filter(|e| e.value.abs() >= (1.0 - CERTIFICATE_TOL) * error)
        .collect();
    let alt = alternating(&near);
    if alt.len() < n + 1 {
        return Err(CertificateDefect::Count {
            found: alt.len(),
            required: n + 1,
        });
    }
    for (i, w) in alt.windows(2).enumerate() {
        if w[0].value.signum() == w[1].value.signum() {
            return Err(CertificateDefect::Sign { index: i + 1 });
        }
    }
    for e in &alt {
        if (e.value.abs() - error).abs() > CERTIFICATE_TOL * error {
            return Err(CertificateDefect::Magnitude {
                value: e.value,
                error,
            });
        }
    }
    Ok(report_from(&alt, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_function, Params};

    fn mono(k: usize) -> TestFunction {
        get_function("monomial", &Params::new().with("k", k)).unwrap()
    }

    #[test]
    fn cubic_minimax() {
        let r = best_unconstrained(&mono(3), 3, DEFAULT_TOL).unwrap();
        assert!(r.converged);
        assert!((r.error - 0.25).abs() < 1e-12);
        let c = r.polynomial.coeffs();
        assert!(c[0].abs() < 1e-12 && (c[1] - 0.75).abs() < 1e-12 && c[2].abs() < 1e-12);
        let cert = alternation_certificate(&r, &mono(3)).unwrap();
        assert_eq!(cert.points.len(), 4);
        for (x, xe) in cert.points.iter().zip([-1.0, -0.5, 0.5, 1.0]) {
            assert!((x - xe).abs() < 1e-7);
        }
        assert_eq!(cert.signs, vec![-1, 1, -1, 1]);
    }

    #[test]
    fn square_minimax() {
        let f = mono(2);
        let r = best_unconstrained(&f, 2, DEFAULT_TOL).unwrap();
        assert!((r.error - 0.5).abs() < 1e-12);
        assert!((r.polynomial.coeffs()[0] - 0.5).abs() < 1e-12);
        let cert = alternation_certificate(&r, &f).unwrap();
        assert_eq!(cert.points.len(), 3);
        assert!((cert.points[1]).abs() < 1e-7);
        assert!((cert.values[0] - 0.5).abs() < 1e-12);
        assert!((cert.values[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn monic_chebyshev_errors() {
        for n in 2..=20 {
            let f = TestFunction::from_poly("power", ChebPoly::monomial(n));
            let r = best_unconstrained(&f, n, 1e-12).unwrap();
            let exact = 2f64.powi(1 - n as i32);
            assert!((r.error - exact).abs() <= 1e-10 * exact, "n={n}: {}", r.error);
        }
    }

    #[test]
    fn polynomial_reproduction() {
        let r = best_unconstrained(&mono(4), 6, DEFAULT_TOL).unwrap();
        assert!(r.converged);
        assert!(r.error <= 1e-12 * 2.0);
    }

    #[test]
    fn exp_degree_five_certificate() {
        let f = get_function("exp", &Params::new()).unwrap();
        let r = best_unconstrained(&f, 5, DEFAULT_TOL).unwrap();
        assert!(r.converged);
        let cert = alternation_certificate(&r, &f).unwrap();
        assert!(cert.points.len() >= 6);
        for v in &cert.values {
            assert!((v.abs() - r.error).abs() <= 1e-8 * r.error);
        }
        assert!(r.lower_bound <= r.error && r.relative_gap() <= DEFAULT_TOL);
    }

    #[test]
    fn abs_converges_with_kink() {
        let f = get_function("abs", &Params::new()).unwrap();
        let r = best_unconstrained(&f, 10, DEFAULT_TOL).unwrap();
        assert!(r.converged, "{:?}", r.diagnostics);
        alternation_certificate(&r, &f).unwrap();
    }

    #[test]
    fn rejects_bad_degree() {
        assert!(matches!(
            best_unconstrained(&mono(2), 52, DEFAULT_TOL),
            Err(Error::DegreeCap { .. })
        ));
        assert!(best_unconstrained(&mono(2), 0, DEFAULT_TOL).is_err());
    }
}
