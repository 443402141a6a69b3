//! Named scenarios. Each one returns its evidence rows and the assertions it
//! checked; assertion failures are collected, never thrown.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_function_ref, solve, sweep, Assertion, ErrorTable, Report, SWEEP_MAX_DEGREE};
use crate::catalog::{list_catalog, monotone_ids, TestFunction};
use crate::chebcore::cheb_grid;
use crate::constrained::ShapeConstraint;
use crate::error::{Error, Result};
use crate::lift::lift_q_monotone;
use crate::moduli::omega_k_of;
use crate::remez::{best_unconstrained, Certificate, DEFAULT_TOL};
use crate::theorems::classify_regime;
use crate::weights::{default_norm_grid, phi, weighted_residual_norm, WeightSpec};

pub const SCENARIOS: &[&str] = &[
    "chain",
    "qmon-lift",
    "compare-q12",
    "pointwise-thm21",
    "inverse-lemma22",
    "thm31-comonotone",
    "q3-divergence",
    "op117-probe",
    "thm13-ratio",
];

/// Slack for inequalities between computed errors.
const CHAIN_SLACK: f64 = 1e-8;
/// Values below this are treated as exact zeros when forming ratios.
const ZERO_FLOOR: f64 = 1e-14;
/// Default bound on max/min ratios over a window.
const SPREAD_CAP: f64 = 10.0;
const WEIGHT_FLOOR: f64 = 1e-14;

/// Optional overrides; every scenario documents its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Function references, `id` or `id:key=value;key=value`.
    pub functions: Option<Vec<String>>,
    pub alphas: Option<Vec<f64>>,
    pub n_from: Option<usize>,
    pub n_to: Option<usize>,
    pub q: Option<usize>,
    pub r: Option<usize>,
    pub ys: Option<Vec<f64>>,
    pub cap: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario config: {e}")))
    }

    fn window(&self, from: usize, to: usize, min_from: usize) -> Result<(usize, usize)> {
        let from = self.n_from.unwrap_or(from);
        let to = self.n_to.unwrap_or(to);
        if from < min_from || to < from || to > SWEEP_MAX_DEGREE {
            return Err(Error::Config(format!(
                "degree window {from}..={to} must satisfy {min_from} <= n_from <= n_to <= {SWEEP_MAX_DEGREE}"
            )));
        }
        Ok((from, to))
    }

    fn alphas_or(&self, default: &[f64]) -> Result<Vec<f64>> {
        let a = self.alphas.clone().unwrap_or_else(|| default.to_vec());
        if a.is_empty() || a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config("alphas must be positive and non-empty".into()));
        }
        Ok(a)
    }

    fn functions_or(&self, default: Vec<String>) -> Vec<String> {
        self.functions.clone().unwrap_or(default)
    }

    fn cap_or(&self, default: f64) -> Result<f64> {
        let c = self.cap.unwrap_or(default);
        if c > 0.0 {
            Ok(c)
        } else {
            Err(Error::Config("cap must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    /// Effective inputs after defaults.
    pub inputs: Value,
    pub rows: Vec<Value>,
    pub assertions: Vec<Assertion>,
    pub diagnostics: Vec<String>,
}

impl ScenarioReport {
    fn new(id: &str, inputs: Value) -> Self {
        Self {
            id: id.to_string(),
            inputs,
            rows: Vec::new(),
            assertions: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn into_report(self) -> Report {
        let mut r = Report::new(&format!("scenario {}", self.id), self.inputs);
        r.rows = self.rows;
        r.assertions = self.assertions;
        r.diagnostics = self.diagnostics;
        r
    }
}

/// Runs a registered scenario.
pub fn run_scenario(name: &str, config: &ScenarioConfig) -> Result<ScenarioReport> {
    match name {
        "chain" => chain(config),
        "qmon-lift" => qmon_lift(config),
        "compare-q12" => compare_q12(config),
        "pointwise-thm21" => pointwise(config),
        "inverse-lemma22" => inverse(config),
        "thm31-comonotone" => comonotone(config),
        "q3-divergence" => q3_divergence(config),
        "op117-probe" => op117_probe(config),
        "thm13-ratio" => interpolatory_ratio(config),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

fn resolve(ids: &[String]) -> Result<Vec<TestFunction>> {
    ids.iter().map(|s| parse_function_ref(s)).collect()
}

fn pow(n: usize, alpha: f64) -> f64 {
    (n as f64).powf(alpha)
}

/// `max / min` of positive values; infinite when the minimum vanishes.
fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn table_values(t: &ErrorTable) -> Result<Vec<(usize, f64)>> {
    t.rows
        .iter()
        .map(|r| {
            r.value.map(|v| (r.n, v)).ok_or_else(|| {
                Error::Solver(format!("{} failed at n = {}: {}", t.meta.function, r.n, r.diagnostics.join("; ")))
            })
        })
        .collect()
}

fn sup_scaled(values: &[(usize, f64)], alpha: f64) -> f64 {
    values.iter().map(|&(n, v)| pow(n, alpha) * v).fold(0.0, f64::max)
}

fn label(f: &TestFunction) -> String {
    let params: Vec<String> = f.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    if params.is_empty() {
        f.id().to_string()
    } else {
        format!("{}:{}", f.id(), params.join(";"))
    }
}

// ----------------------------------------------------------------------------

const CHAIN_LINKS: [(&str, usize, usize, &str); 4] = [
    ("delta <= phi", 0, 1, "weights::delta_norm_le_phi_norm"),
    ("phi <= phi_q1", 1, 3, "constrained::constraint_never_lowers_error"),
    ("delta <= delta_q1", 0, 2, "constrained::constraint_never_lowers_error"),
    ("delta_q1 <= phi_q1", 2, 3, "weights::delta_norm_le_phi_norm"),
];

/// Ordering of the four weighted functionals (delta/phi weights, with and
/// without monotonicity). Defaults: monotone catalog entries, alpha in
/// {0.5, 1, 2}, n in 2..=16.
fn chain(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ids = cfg.functions_or(monotone_ids());
    let alphas = cfg.alphas_or(&[0.5, 1.0, 2.0])?;
    let (from, to) = cfg.window(2, 16, 2)?;
    let funcs = resolve(&ids)?;
    let mono = ShapeConstraint::new(1, vec![])?;
    let mut report = ScenarioReport::new(
        "chain",
        json!({"functions": ids, "alphas": alphas, "n_from": from, "n_to": to, "slack": CHAIN_SLACK}),
    );
    for f in &funcs {
        if !f.is_member(&mono) {
            report.diagnostics.push(format!("{} is not nondecreasing; the chain still applies", label(f)));
        }
    }

    let jobs: Vec<(usize, f64, usize)> = (0..funcs.len())
        .flat_map(|i| alphas.iter().flat_map(move |&a| (from..=to).map(move |n| (i, a, n))))
        .collect();
    let results: Vec<([f64; 4], bool)> = jobs
        .par_iter()
        .map(|&(i, a, n)| {
            let f = &funcs[i];
            let delta = WeightSpec::delta(a, None)?;
            let phi = WeightSpec::phi(a)?;
            let r = [
                solve(f, n, None, &delta, DEFAULT_TOL)?,
                solve(f, n, None, &phi, DEFAULT_TOL)?,
                solve(f, n, Some(&mono), &delta, DEFAULT_TOL)?,
                solve(f, n, Some(&mono), &phi, DEFAULT_TOL)?,
            ];
            let converged = r.iter().all(|x| x.converged);
            Ok(([r[0].error, r[1].error, r[2].error, r[3].error], converged))
        })
        .collect::<Result<_>>()?;

    let mut worst = vec![[f64::NEG_INFINITY; 4]; funcs.len()];
    for (&(i, a, n), (v, converged)) in jobs.iter().zip(&results) {
        report.rows.push(json!({
            "f": label(&funcs[i]), "alpha": a, "n": n,
            "delta": v[0], "phi": v[1], "delta_q1": v[2], "phi_q1": v[3],
            "converged": converged,
        }));
        for (k, &(_, lo, hi, _)) in CHAIN_LINKS.iter().enumerate() {
            worst[i][k] = worst[i][k].max(v[lo] - v[hi]);
        }
    }
    for (i, f) in funcs.iter().enumerate() {
        for (k, &(name, _, _, inv)) in CHAIN_LINKS.iter().enumerate() {
            report.assertions.push(
                Assertion::at_most(&format!("chain {}: {name}", label(f)), inv, worst[i][k], CHAIN_SLACK)
                    .with_provenance("cutting-plane LP on the default weighted norm grid")
                    .with_detail("largest lhs - rhs over alpha and n"),
            );
        }
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// Lift of a best approximation of `f^(q)` against the direct constrained
/// solve. Defaults: `exp`, `q = 2`, `n = 10`.
fn qmon_lift(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ids = cfg.functions_or(vec!["exp".into()]);
    let q = cfg.q.unwrap_or(2);
    if q == 0 {
        return Err(Error::Config("q must be at least 1".into()));
    }
    let (from, to) = cfg.window(10, 10, q + 1)?;
    let funcs = resolve(&ids)?;
    let constraint = ShapeConstraint::new(q, vec![])?;
    let mut report = ScenarioReport::new("qmon-lift", json!({"functions": ids, "q": q, "n_from": from, "n_to": to}));

    let jobs: Vec<(usize, usize)> = (0..funcs.len()).flat_map(|i| (from..=to).map(move |n| (i, n))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let (_, lift) = lift_q_monotone(&funcs[i], q, n)?;
            let direct = solve(&funcs[i], n, Some(&constraint), &WeightSpec::unweighted(), DEFAULT_TOL)?;
            Ok((lift, direct))
        })
        .collect::<Result<_>>()?;

    for (&(i, n), (lift, direct)) in jobs.iter().zip(&results) {
        let name = format!("qmon-lift {} q={q} n={n}", label(&funcs[i]));
        report.rows.push(json!({
            "f": label(&funcs[i]), "q": q, "n": n,
            "e": lift.e, "achieved": lift.achieved_error, "guaranteed": lift.guaranteed_bound,
            "ratio_to_2_over_q_factorial": lift.qfact_ratio,
            "direct": direct.error, "shape_feasible": lift.shape.feasible,
            "retried": lift.retried, "derivative": lift.derivative,
        }));
        report.assertions.push(
            Assertion::at_most(
                &format!("{name}: guaranteed bound"),
                "lift::guaranteed_bound",
                lift.achieved_error - lift.guaranteed_bound,
                CHAIN_SLACK,
            )
            .with_provenance("Remez on f^(q), integrated q times")
            .with_detail("||f - P|| - (2^q/q!) E_{n-q}(f^(q))"),
        );
        report.assertions.push(
            Assertion::holds(&format!("{name}: shape"), "lift::output_is_q_monotone", lift.shape.feasible)
                .with_provenance("derivative scan on a Lobatto grid"),
        );
        report.assertions.push(
            Assertion::at_most(
                &format!("{name}: direct solve is no worse"),
                "constrained::optimal_over_shape_class",
                direct.error - lift.achieved_error,
                CHAIN_SLACK,
            )
            .with_provenance("cutting-plane LP vs lift"),
        );
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// `sup_n n^a E_n^(q)(f) / sup_n n^a E_n(f)` for q in {1, 2} against an
/// empirical cap. Defaults: catalog members of the class, alpha in
/// {0.5, 1, 2, 3}, n <= 24, cap 50.
fn compare_q12(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut default: Vec<String> = list_catalog().into_iter().map(|e| e.id).collect();
    default.push("abs_primitive:q=2".into());
    let ids = cfg.functions_or(default);
    let alphas = cfg.alphas_or(&[0.5, 1.0, 2.0, 3.0])?;
    let (_, to) = cfg.window(1, 24, 1)?;
    let cap = cfg.cap_or(50.0)?;
    let qs: Vec<usize> = cfg.q.map_or(vec![1, 2], |q| vec![q]);
    if qs.iter().any(|&q| q == 0 || q >= to) {
        return Err(Error::Config("q must satisfy 1 <= q < n_to".into()));
    }
    let funcs = resolve(&ids)?;
    let mut report = ScenarioReport::new(
        "compare-q12",
        json!({"functions": ids, "alphas": alphas, "qs": qs, "n_to": to, "empirical_cap": cap}),
    );

    let jobs: Vec<(usize, usize)> = funcs
        .iter()
        .enumerate()
        .flat_map(|(i, f)| {
            qs.iter()
                .filter(move |&&q| f.is_member(&ShapeConstraint::new(q, vec![]).expect("valid constraint")))
                .map(move |&q| (i, q))
        })
        .collect();
    let results: Vec<(Vec<(usize, f64)>, Vec<(usize, f64)>)> = jobs
        .par_iter()
        .map(|&(i, q)| {
            let f = &funcs[i];
            let c = ShapeConstraint::new(q, vec![])?;
            let plain = table_values(&sweep(f, None, &WeightSpec::unweighted(), 1, to, 0.0)?)?;
            let shaped = table_values(&sweep(f, Some(&c), &WeightSpec::unweighted(), q + 1, to, 0.0)?)?;
            // below q + 1 the shape condition on P is vacuous
            let shaped = plain.iter().take(q).copied().chain(shaped).collect();
            Ok((plain, shaped))
        })
        .collect::<Result<_>>()?;

    for (&(i, q), (plain, shaped)) in jobs.iter().zip(&results) {
        let f = label(&funcs[i]);
        for &a in &alphas {
            let su = sup_scaled(plain, a);
            let sc = sup_scaled(shaped, a);
            if su <= ZERO_FLOOR {
                report.diagnostics.push(format!("{f}: unconstrained errors vanish; ratio undefined"));
                continue;
            }
            let ratio = sc / su;
            report.rows.push(json!({
                "f": f, "q": q, "alpha": a,
                "sup_constrained": sc, "sup_unconstrained": su, "ratio": ratio,
                "empirical_cap": cap,
            }));
            report.assertions.push(
                Assertion::at_most(
                    &format!("compare-q12 {f} q={q} alpha={a}"),
                    "experiments::scaled_sup_ratio_below_empirical_cap",
                    ratio,
                    cap,
                )
                .with_provenance("Remez (unconstrained), cutting-plane LP (constrained)")
                .with_detail(format!("empirical cap, n in 1..={to}")),
            );
        }
    }
    let skipped: Vec<String> = funcs
        .iter()
        .enumerate()
        .filter(|(i, _)| !jobs.iter().any(|(j, _)| j == i))
        .map(|(_, f)| label(f))
        .collect();
    if !skipped.is_empty() {
        report.diagnostics.push(format!("not in the q-monotone classes tested: {}", skipped.join(", ")));
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// `omega_2(g, t)` tabulated on a geometric ladder and interpolated
/// linearly; below the ladder it decays like `t^2`.
struct ModulusTable {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl ModulusTable {
    fn new(g: &(dyn Fn(f64) -> f64 + Send + Sync), kinks: &[f64], t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
        let t: Vec<f64> = (0..points).map(|i| t_min * ratio.powi(i as i32)).collect();
        let w = t
            .par_iter()
            .map(|&t| omega_k_of(&|x| g(x), kinks, 2, t, 64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { t, w })
    }

    fn eval(&self, t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t <= self.t[0] {
            return self.w[0] * (t / self.t[0]).powi(2);
        }
        if t >= self.t[last] {
            return self.w[last];
        }
        let i = self.t.partition_point(|&s| s <= t) - 1;
        let u = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.w[i] + u * (self.w[i + 1] - self.w[i])
    }
}

/// Monotone approximation in the weight `(phi/n)^r omega_2(f^(r), phi/n)`.
/// Pairs with `f` outside `C^r` are skipped. Defaults: `x|x|`, `(x)_+^2`,
/// `(x)_+^3`, r in {1, 2}, n in 5..=16.
fn pointwise(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ids = cfg.functions_or(vec!["xabsx".into(), "trunc:m=2".into(), "trunc:m=3".into()]);
    let rs: Vec<usize> = cfg.r.map_or(vec![1, 2], |r| vec![r]);
    let (from, to) = cfg.window(5, 16, 2)?;
    let funcs = resolve(&ids)?;
    let mono = ShapeConstraint::new(1, vec![])?;
    let mut report = ScenarioReport::new(
        "pointwise-thm21",
        json!({"functions": ids, "rs": rs, "n_from": from, "n_to": to, "spread_cap": SPREAD_CAP, "weight_floor": WEIGHT_FLOOR}),
    );

    let mut pairs = Vec::new();
    for (i, f) in funcs.iter().enumerate() {
        for &r in &rs {
            // W^(r+1) is the catalog's witness for C^r
            if f.sobolev_order().map_or(true, |s| s > r) {
                pairs.push((i, r));
            } else {
                report.diagnostics.push(format!("{} r={r}: skipped, not in C^{r}", label(f)));
            }
        }
    }
    for &(i, r) in &pairs {
        let f = &funcs[i];
        if r > f.r_max() {
            return Err(Error::Config(format!("{} has no derivative of order {r}", label(f))));
        }
        let (g, provenance) = f.derivative_fn(r);
        let table = Arc::new(ModulusTable::new(&*g, f.kink_points(), 1e-7, 1.0 / from as f64, 96)?);
        let ratios: Vec<(usize, f64, bool)> = (from..=to)
            .into_par_iter()
            .map(|n| {
                let table = Arc::clone(&table);
                let w = move |x: f64| {
                    let t = phi(x) / n as f64;
                    (t.powi(r as i32) * table.eval(t)).max(WEIGHT_FLOOR)
                };
                let spec = WeightSpec::custom(&format!("(phi/n)^{r} w2(f^({r}), phi/n)"), w);
                let res = solve(f, n, Some(&mono), &spec, DEFAULT_TOL)?;
                Ok((n, res.error, res.converged))
            })
            .collect::<Result<_>>()?;
        for &(n, ratio, converged) in &ratios {
            report.rows.push(json!({
                "f": label(f), "r": r, "n": n, "minimax_ratio": ratio, "converged": converged,
                "derivative": provenance,
            }));
        }
        let values: Vec<f64> = ratios.iter().map(|x| x.1).collect();
        report.assertions.push(
            Assertion::at_most(
                &format!("pointwise-thm21 {} r={r}: ratio spread", label(f)),
                "experiments::pointwise_ratio_bounded",
                spread(&values),
                SPREAD_CAP,
            )
            .with_provenance("cutting-plane LP with tabulated modulus weight")
            .with_detail(format!("max/min of the minimax ratio over n in {from}..={to}; empirical cap")),
        );
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// Inverse check: near-best approximants in the `rho_n^(r+alpha)` norm and
/// the modulus bound they imply. Defaults: r = 1, alpha = 1.5,
/// `f = (x+1)^(r+alpha)`, n in 4..=16.
fn inverse(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let r = cfg.r.unwrap_or(1);
    let alphas = cfg.alphas_or(&[1.5])?;
    if alphas.iter().any(|&a| a >= 2.0) {
        return Err(Error::Config("alpha must lie in (0, 2)".into()));
    }
    let (from, to) = cfg.window(4, 16, r + 3)?;
    let ladder: Vec<f64> = (1..=12).map(|k| 0.5f64.powi(k)).collect();
    let mut report = ScenarioReport::new(
        "inverse-lemma22",
        json!({"functions": cfg.functions, "r": r, "alphas": alphas, "n_from": from, "n_to": to, "t_ladder": ladder}),
    );

    for &a in &alphas {
        let ids = cfg.functions_or(vec![format!("endpoint_power:gamma={}", r as f64 + a)]);
        for f in resolve(&ids)? {
            if r > f.r_max() {
                return Err(Error::Config(format!("{} has no derivative of order {r}", label(&f))));
            }
            let gamma = r as f64 + a;
            let cs: Vec<(usize, f64, f64)> = (from..=to)
                .into_par_iter()
                .map(|n| {
                    let spec = WeightSpec::delta(gamma, Some(n))?;
                    let res = solve(&f, n, None, &spec, DEFAULT_TOL)?;
                    let fine = weighted_residual_norm(&f, &res.polynomial, &spec, &cheb_grid(64 * n))?;
                    Ok((n, pow(n, gamma) * res.error, pow(n, gamma) * fine.value))
                })
                .collect::<Result<_>>()?;
            let c = cs.iter().map(|x| x.1).fold(0.0, f64::max);
            let c_fine = cs.iter().map(|x| x.2).fold(0.0, f64::max);
            for &(n, cn, cf) in &cs {
                report.rows.push(json!({"kind": "hypothesis", "f": label(&f), "alpha": a, "n": n, "c_n": cn, "c_n_fine_grid": cf}));
            }
            report.assertions.push(
                Assertion::at_most(
                    &format!("inverse-lemma22 {} alpha={a}: hypothesis on fine grid", label(&f)),
                    "weights::grid_norm_resolves_sup",
                    c_fine / c,
                    1.01,
                )
                .with_provenance("weighted LP on the default grid, re-measured on a 64n Lobatto grid"),
            );

            // f / C satisfies the hypothesis with constant 1
            let (g, _) = f.derivative_fn(r);
            let e = best_unconstrained(&f, r + 2, DEFAULT_TOL)?.error / c;
            let quotients: Vec<(f64, f64, f64)> = ladder
                .iter()
                .map(|&t| {
                    let w = omega_k_of(&|x| g(x), f.kink_points(), 2, t, 128)? / c;
                    Ok((t, w, w / (t.powf(a) + t * t * e)))
                })
                .collect::<Result<_>>()?;
            for &(t, w, qt) in &quotients {
                report.rows.push(json!({"kind": "modulus", "f": label(&f), "alpha": a, "t": t, "omega2": w, "quotient": qt}));
            }
            let c_prime = quotients.iter().map(|x| x.2).fold(0.0, f64::max);
            let half = quotients.len() / 2;
            let coarse = quotients[..half].iter().map(|x| x.2).fold(0.0, f64::max);
            let fine = quotients[half..].iter().map(|x| x.2).fold(0.0, f64::max);
            report.rows.push(json!({"kind": "summary", "f": label(&f), "alpha": a, "c": c, "e_r_plus_2": e, "smallest_c_prime": c_prime}));
            report.assertions.push(
                Assertion::at_most(
                    &format!("inverse-lemma22 {} alpha={a}: modulus rate", label(&f)),
                    "moduli::inverse_rate",
                    fine / coarse,
                    2.0,
                )
                .with_provenance("numerical omega_2 of f^(r) on the t ladder")
                .with_detail(format!("smallest working C' = {c_prime:e}; small-t over large-t quotient max")),
            );
        }
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// Comonotone errors with one change point, normalized so that
/// `min_n n^a E_n(f) = 1`, and the empirical threshold from which they stay
/// under `cap * sup_n n^a E_n`. Defaults: `|x - y|^1.5` with y in
/// {0, 0.9, 0.99}, alpha in {1.5, 2, 3}, n in 2..=24, cap factor 2.
fn comonotone(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ys = cfg.ys.clone().unwrap_or(vec![0.0, 0.9, 0.99]);
    let alphas = cfg.alphas_or(&[1.5, 2.0, 3.0])?;
    let (from, to) = cfg.window(2, 24, 2)?;
    let factor = cfg.cap_or(2.0)?;
    let template = cfg
        .functions
        .as_ref()
        .and_then(|f| f.first().cloned())
        .unwrap_or_else(|| "abs_power:a={y};gamma=1.5".into());
    let mut report = ScenarioReport::new(
        "thm31-comonotone",
        json!({"function": template, "ys": ys, "alphas": alphas, "n_from": from, "n_to": to, "empirical_cap_factor": factor}),
    );

    let tables: Vec<(TestFunction, ShapeConstraint, Vec<(usize, f64)>, Vec<(usize, f64)>)> = ys
        .par_iter()
        .map(|&y| {
            let f = parse_function_ref(&template.replace("{y}", &y.to_string()))?;
            let c = ShapeConstraint::new(1, vec![y])?;
            let plain = table_values(&sweep(&f, None, &WeightSpec::unweighted(), from, to, 0.0)?)?;
            let shaped = table_values(&sweep(&f, Some(&c), &WeightSpec::unweighted(), from, to, 0.0)?)?;
            Ok((f, c, plain, shaped))
        })
        .collect::<Result<_>>()?;

    for (f, c, plain, shaped) in &tables {
        let y = c.change_points()[0];
        report.assertions.push(
            Assertion::holds(&format!("thm31-comonotone y={y}: membership"), "catalog::shape_membership", f.is_member(c))
                .with_provenance("derivative sign scan"),
        );
        let gap = plain.iter().zip(shaped).map(|(u, s)| u.1 - s.1).fold(f64::NEG_INFINITY, f64::max);
        report.assertions.push(
            Assertion::at_most(
                &format!("thm31-comonotone y={y}: constrained dominates"),
                "constrained::constraint_never_lowers_error",
                gap,
                CHAIN_SLACK,
            )
            .with_provenance("Remez vs cutting-plane LP"),
        );
        for &a in &alphas {
            let min = plain.iter().map(|&(n, v)| pow(n, a) * v).fold(f64::INFINITY, f64::min);
            if min <= ZERO_FLOOR {
                report.diagnostics.push(format!("{}: cannot normalize, unconstrained error vanishes", label(f)));
                continue;
            }
            let lambda = 1.0 / min;
            let cap = factor * lambda * sup_scaled(plain, a);
            let scaled: Vec<(usize, f64, f64)> = plain
                .iter()
                .zip(shaped)
                .map(|(&(n, u), &(_, s))| (n, lambda * pow(n, a) * u, lambda * pow(n, a) * s))
                .collect();
            let mut n_star = None;
            for &(n, _, s) in scaled.iter().rev() {
                if s > cap {
                    break;
                }
                n_star = Some(n);
            }
            for &(n, u, s) in &scaled {
                report.rows.push(json!({"kind": "row", "y": y, "alpha": a, "n": n, "scaled_unconstrained": u, "scaled_constrained": s}));
            }
            report.rows.push(json!({
                "kind": "summary", "y": y, "alpha": a, "normalization": lambda,
                "empirical_cap": cap, "n_star": n_star,
                "regime_at_window_start": classify_regime(a, from, 1),
            }));
        }
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// Finite-window trend of `n E_n^(q)(f, Y)` for a q = 3 class member.
/// Defaults: `q3_family`, Y = {0}, n in 8..=24.
fn q3_divergence(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let id = cfg
        .functions
        .as_ref()
        .and_then(|f| f.first().cloned())
        .unwrap_or_else(|| "q3_family".into());
    let ys = cfg.ys.clone().unwrap_or(vec![0.0]);
    let q = cfg.q.unwrap_or(3);
    let (from, to) = cfg.window(8, 24, q + 1)?;
    let f = parse_function_ref(&id)?;
    let c = ShapeConstraint::new(q, ys.clone())?;
    let r = f.sobolev_order().or(cfg.r).unwrap_or(q - 1);
    let mut report = ScenarioReport::new(
        "q3-divergence",
        json!({"function": id, "q": q, "ys": ys, "n_from": from, "n_to": to, "sobolev_order": r}),
    );
    report.diagnostics.push(format!("trend measured on the finite window n in {from}..={to}"));
    if !f.is_member(&c) {
        report.diagnostics.push(format!("{} is not in the requested shape class", label(&f)));
    }

    let shaped = table_values(&sweep(&f, Some(&c), &WeightSpec::unweighted(), from, to, 1.0)?)?;
    let plain = table_values(&sweep(&f, None, &WeightSpec::unweighted(), from, to, r as f64)?)?;
    for (&(n, s), &(_, u)) in shaped.iter().zip(&plain) {
        report.rows.push(json!({
            "n": n, "constrained": s, "n_constrained": n as f64 * s,
            "unconstrained": u, "scaled_unconstrained": pow(n, r as f64) * u,
        }));
    }
    let first = from as f64 * shaped[0].1;
    let last = to as f64 * shaped[shaped.len() - 1].1;
    report.assertions.push(
        Assertion::greater_than(
            &format!("q3-divergence {}: growth of n E_n^({q}) from n={from} to n={to}", label(&f)),
            "experiments::finite_window_growth_trend",
            last / first,
            1.0,
        )
        .with_provenance("cutting-plane LP")
        .with_detail(format!("n E_n at n={to} is {last:e}, at n={from} is {first:e}")),
    );
    let scaled: Vec<f64> = plain.iter().map(|&(n, u)| pow(n, r as f64) * u).collect();
    report.assertions.push(
        Assertion::at_most(
            &format!("q3-divergence {}: n^{r} E_n bounded", label(&f)),
            "experiments::unconstrained_scaled_bounded",
            spread(&scaled),
            SPREAD_CAP,
        )
        .with_provenance("Remez")
        .with_detail("max/min over the window"),
    );
    Ok(report)
}

// ----------------------------------------------------------------------------

/// Coconvex approximation with three change points for functions normalized
/// to `n^4 E_n(f) <= 1` on the window. Defaults: eps in {0.05, 0.2},
/// Y = {1/2, 0, -1/2}, n in 6..=20.
fn op117_probe(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ids = cfg.functions_or(vec!["op117:eps=0.05".into(), "op117:eps=0.2".into()]);
    let ys = cfg.ys.clone().unwrap_or(vec![0.5, 0.0, -0.5]);
    let q = cfg.q.unwrap_or(2);
    let (from, to) = cfg.window(6, 20, q + 1)?;
    let c = ShapeConstraint::new(q, ys.clone())?;
    let funcs = resolve(&ids)?;
    let mut report = ScenarioReport::new(
        "op117-probe",
        json!({"functions": ids, "q": q, "ys": ys, "n_from": from, "n_to": to}),
    );

    for f in &funcs {
        let name = label(f);
        report.assertions.push(
            Assertion::holds(&format!("op117-probe {name}: membership"), "catalog::shape_membership", f.is_member(&c))
                .with_provenance("derivative sign scan"),
        );
        let plain = table_values(&sweep(f, None, &WeightSpec::unweighted(), from, to, 4.0)?)?;
        let m = sup_scaled(&plain, 4.0);
        let lambda = if m > ZERO_FLOOR { 1.0 / m } else { 1.0 };
        if m <= ZERO_FLOOR {
            report.diagnostics.push(format!("{name}: polynomial on the window, no normalization applied"));
        }
        let g = f.scaled(lambda);
        let mut degrees: Vec<usize> = (from..=to).collect();
        if !degrees.contains(&6) && 6 > q {
            degrees.insert(0, 6);
        }
        let solved: Vec<(usize, f64, bool, Vec<f64>)> = degrees
            .par_iter()
            .map(|&n| {
                let res = solve(&g, n, Some(&c), &WeightSpec::unweighted(), DEFAULT_TOL)?;
                let feasible = match &res.certificate {
                    Certificate::ActiveSet(a) => a.shape.as_ref().map_or(true, |s| s.feasible),
                    Certificate::Alternation(_) => false,
                };
                Ok((n, res.error, feasible, res.polynomial.coeffs().to_vec()))
            })
            .collect::<Result<_>>()?;

        let mut all_feasible = true;
        for (n, err, feasible, coeffs) in &solved {
            all_feasible &= *feasible;
            let plain_scaled = plain.iter().find(|p| p.0 == *n).map(|&(n, u)| lambda * pow(n, 4.0) * u);
            report.rows.push(json!({
                "kind": "row", "f": name, "n": n,
                "scaled_unconstrained": plain_scaled, "scaled_constrained": pow(*n, 4.0) * err,
                "shape_feasible": feasible,
            }));
            if *n == 6 {
                report.rows.push(json!({
                    "kind": "degree_6_solution", "f": name, "n": 6, "chebyshev_coefficients": coeffs,
                    "scaled_constrained": pow(6, 4.0) * err, "shape_feasible": feasible,
                }));
            }
        }
        report.assertions.push(
            Assertion::holds(&format!("op117-probe {name}: solutions in shape class"), "constrained::output_in_shape_class", all_feasible)
                .with_provenance("cutting-plane LP shape verification"),
        );
        let worst = solved.iter().map(|s| pow(s.0, 4.0) * s.1).fold(0.0, f64::max);
        report.diagnostics.push(format!("{name}: max n^4 E_n^({q}) over the window = {worst:e}"));
    }
    Ok(report)
}

// ----------------------------------------------------------------------------

/// `sup_{n >= N*} n^a E^(1)_{n,a}(f) / sup_{n >= N} n^a E~_{n,a}(f)` as a
/// function of the trial `N*`. Defaults: monotone catalog entries, alpha in
/// {1, 2, 3}, n in 2..=16, cap 10.
fn interpolatory_ratio(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let ids = cfg.functions_or(monotone_ids());
    let alphas = cfg.alphas_or(&[1.0, 2.0, 3.0])?;
    let (from, to) = cfg.window(2, 16, 2)?;
    let cap = cfg.cap_or(10.0)?;
    let funcs = resolve(&ids)?;
    let mono = ShapeConstraint::new(1, vec![])?;
    let mut report = ScenarioReport::new(
        "thm13-ratio",
        json!({"functions": ids, "alphas": alphas, "n_from": from, "n_to": to, "empirical_cap": cap}),
    );
    report.diagnostics.push(format!("N = {from}; trial N* runs over {from}..={to}"));

    let jobs: Vec<(usize, f64)> = (0..funcs.len()).flat_map(|i| alphas.iter().map(move |&a| (i, a))).collect();
    let results: Vec<Vec<(usize, f64, f64, bool)>> = jobs
        .par_iter()
        .map(|&(i, a)| {
            let f = &funcs[i];
            let phi_spec = WeightSpec::phi(a)?;
            let delta = WeightSpec::delta(a, None)?;
            (from..=to)
                .map(|n| {
                    let e1 = solve(f, n, Some(&mono), &phi_spec, DEFAULT_TOL)?;
                    let trend = weighted_residual_norm(f, &e1.polynomial, &phi_spec, &default_norm_grid(&phi_spec, n))?;
                    let et = solve(f, n, None, &delta, DEFAULT_TOL)?;
                    Ok((n, e1.error, et.error, trend.divergence_flag))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    for (&(i, a), rows) in jobs.iter().zip(&results) {
        let f = label(&funcs[i]);
        let gap = rows.iter().map(|r| r.2 - r.1).fold(f64::NEG_INFINITY, f64::max);
        report.assertions.push(
            Assertion::at_most(
                &format!("thm13-ratio {f} alpha={a}: delta-weighted below phi-weighted monotone"),
                "weights::delta_norm_le_phi_norm",
                gap,
                CHAIN_SLACK,
            )
            .with_provenance("weighted cutting-plane LP"),
        );
        let denom = rows.iter().map(|r| pow(r.0, a) * r.2).fold(0.0, f64::max);
        if denom <= ZERO_FLOOR {
            report.diagnostics.push(format!("{f} alpha={a}: denominator vanishes, ratio undefined"));
            continue;
        }
        let mut estimate = None;
        for k in (0..rows.len()).rev() {
            let ratio = rows[k..].iter().map(|r| pow(r.0, a) * r.1).fold(0.0, f64::max) / denom;
            if ratio > cap {
                break;
            }
            estimate = Some(rows[k].0);
        }
        for (k, r) in rows.iter().enumerate() {
            let ratio = rows[k..].iter().map(|r| pow(r.0, a) * r.1).fold(0.0, f64::max) / denom;
            report.rows.push(json!({
                "kind": "trial", "f": f, "alpha": a, "n_star_trial": r.0, "ratio": ratio,
                "scaled_constrained": pow(r.0, a) * r.1 / denom, "trend_flag": r.3,
            }));
        }
        report.rows.push(json!({"kind": "summary", "f": f, "alpha": a, "denominator": denom, "empirical_cap": cap, "n_star_estimate": estimate}));
        if rows.iter().any(|r| r.3) {
            report.diagnostics.push(format!("{f} alpha={a}: near-endpoint trend flags probable divergence of the continuous norm"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ScenarioConfig::from_json(r#"{"alphas": [1.0], "n_to": 6}"#).unwrap();
        assert_eq!(c.alphas, Some(vec![1.0]));
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(c.window(2, 16, 2).is_ok());
        assert!(c.window(8, 16, 2).is_err());
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(
            run_scenario("nope", &ScenarioConfig::default()),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn small_chain_passes() {
        let cfg = ScenarioConfig {
            functions: Some(vec!["exp".into(), "xabsx".into()]),
            n_to: Some(6),
            ..Default::default()
        };
        let r = run_scenario("chain", &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.rows.len(), 2 * 3 * 5);
        assert_eq!(r.assertions.len(), 8);
    }

    #[test]
    fn modulus_table_interpolates() {
        let g = |x: f64| x * x;
        let t = ModulusTable::new(&g, &[], 1e-4, 0.5, 32).unwrap();
        for s in [1e-5, 1e-3, 0.1, 0.3] {
            assert!((t.eval(s) - 2.0 * s * s).abs() <= 0.05 * 2.0 * s * s, "{s}");
        }
    }

    #[test]
    fn spread_of_values() {
        assert_eq!(spread(&[1.0, 4.0, 2.0]), 4.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn registry_is_complete() {
        assert_eq!(SCENARIOS.len(), 9);
        for s in SCENARIOS {
            let cfg = ScenarioConfig { n_from: Some(60), ..Default::default() };
            // every name dispatches; the bad window is rejected as configuration
            assert!(matches!(run_scenario(s, &cfg), Err(Error::Config(_))), "{s}");
        }
    }
}
