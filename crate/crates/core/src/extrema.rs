//! Scanning and refinement of local extrema of a function on [-1, 1].

use crate::chebcore::cheb_grid;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximizes `g` on `[a, b]` by golden-section search; returns `(x, g(x))`.
pub(crate) fn golden_max<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..200 {
        if (b - a) <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = g(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scan points: Chebyshev-Lobatto nodes plus a geometric cluster around
/// each kink (the kink itself included).
pub(crate) fn scan_points(base: usize, kinks: &[f64], cluster_radius: f64) -> Vec<f64> {
    let mut pts = cheb_grid(base.max(8)).nodes().to_vec();
    for &k in kinks {
        pts.push(k);
        let mut h = cluster_radius;
        for _ in 0..24 {
            for x in [k - h, k + h] {
                if x > -1.0 && x < 1.0 {
                    pts.push(x);
                }
            }
            h *= 0.5;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// A signed local extremum of a residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Local maxima of `|r|` on the scan, each refined on its bracket by
/// maximizing `sign * r`. Kinks and endpoints are kept unrefined when they are
/// the local maximum themselves.
pub(crate) fn signed_extrema<R: Fn(f64) -> f64>(r: &R, pts: &[f64], kinks: &[f64]) -> Vec<Extremum> {
    let vals: Vec<f64> = pts.iter().map(|&x| r(x)).collect();
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = vals[i];
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        let s = v.signum();
        let left = if i > 0 { s * vals[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < n { s * vals[i + 1] } else { f64::NEG_INFINITY };
        let here = s * v;
        // plateau ties resolve to the leftmost node
        if !(here > left && here >= right) {
            continue;
        }
        let x = pts[i];
        let pinned = i == 0 || i + 1 == n || kinks.iter().any(|k| *k == x);
        if pinned {
            out.push(Extremum { x, value: v });
            continue;
        }
        let g = |t: f64| s * r(t);
        let (xr, gr) = golden_max(&g, pts[i - 1], pts[i + 1]);
        if gr >= here {
            out.push(Extremum { x: xr, value: s * gr });
        } else {
            out.push(Extremum { x, value: v });
        }
    }
    out
}

/// Collapses runs of equal sign to their largest member, giving an
/// alternating sequence.
pub(crate) fn alternating(ext: &[Extremum]) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::new();
    for e in ext {
        match out.last_mut() {
            Some(last) if last.value.signum() == e.value.signum() => {
                if e.value.abs() > last.value.abs() {
                    *last = *e;
                }
            }
            _ => out.push(*e),
        }
    }
    out
}
