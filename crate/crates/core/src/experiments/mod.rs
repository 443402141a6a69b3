//! Degree sweeps, named scenarios and report emission.

mod report;
mod scenarios;

pub use report::{svg_loglog, Assertion, Report, SCHEMA_VERSION, TABLE_COLUMNS};
pub use scenarios::{run_scenario, ScenarioConfig, ScenarioReport, SCENARIOS};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::catalog::{get_function, Params, TestFunction};
use crate::constrained::{best_constrained, ShapeConstraint};
use crate::error::{Error, Result};
use crate::remez::{best_unconstrained, ApproxResult, DEFAULT_TOL};
use crate::weights::WeightSpec;

/// Largest degree bound a sweep may reach.
pub const SWEEP_MAX_DEGREE: usize = 50;

/// Slack for the non-increasing check on sweep values.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Parses `id` or `id:key=value;key=value` into a catalog function.
pub fn parse_function_ref(s: &str) -> Result<TestFunction> {
    let (id, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params = Params::new();
    for pair in rest.split(';').filter(|p| !p.trim().is_empty()) {
        params.insert_pair(pair.trim())?;
    }
    get_function(id.trim(), &params)
}

/// Remez for the plain uniform norm, the cutting-plane LP otherwise.
pub fn solve(
    f: &TestFunction,
    n: usize,
    constraint: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    tol: f64,
) -> Result<ApproxResult> {
    let plain = spec.is_unweighted() && !spec.interpolate_left() && !spec.interpolate_right();
    if constraint.is_none() && plain {
        best_unconstrained(f, n, tol)
    } else {
        best_constrained(f, n, constraint, spec, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    /// `None` when the solver failed for this degree.
    pub value: Option<f64>,
    /// `n^alpha * value`.
    pub scaled: Option<f64>,
    pub lower_bound: Option<f64>,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableMeta {
    pub function: String,
    pub params: Params,
    pub constraint: Option<ShapeConstraint>,
    pub weight: WeightSpec,
    pub alpha: f64,
    /// First degree of the window.
    pub n_window: usize,
    /// First degree from which every scaled value stays at or below `cap`.
    pub n_star_candidate: Option<usize>,
    pub cap: Option<f64>,
    pub sup_scaled: Option<f64>,
}

/// Errors of best approximation over a window of degrees, sorted by `n`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorTable {
    pub meta: TableMeta,
    pub rows: Vec<TableRow>,
}

impl ErrorTable {
    pub fn row(&self, n: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn value(&self, n: usize) -> Option<f64> {
        self.row(n).and_then(|r| r.value)
    }

    pub fn scaled(&self, n: usize) -> Option<f64> {
        self.row(n).and_then(|r| r.scaled)
    }

    /// Sup of the scaled column over rows with `n >= from`; `None` if any of
    /// them failed.
    pub fn sup_scaled_from(&self, from: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n >= from)
            .map(|r| r.scaled)
            .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))
    }

    /// Smallest `n0` in the window such that every scaled value with
    /// `n >= n0` is at most `cap`. Failed rows never satisfy the cap.
    pub fn n_star(&self, cap: f64) -> Option<usize> {
        let mut candidate = None;
        for r in self.rows.iter().rev() {
            match r.scaled {
                Some(s) if s <= cap => candidate = Some(r.n),
                _ => break,
            }
        }
        candidate
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.meta.cap = Some(cap);
        self.meta.n_star_candidate = self.n_star(cap);
        self
    }

    /// Whether successful values never increase by more than `slack`.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        let vals: Vec<f64> = self.rows.iter().filter_map(|r| r.value).collect();
        vals.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn to_report(&self, command: &str, inputs: serde_json::Value) -> Report {
        let mut r = Report::new(command, inputs);
        r.rows = self
            .rows
            .iter()
            .map(|row| {
                json!({
                    "n": row.n,
                    "value": row.value,
                    "scaled": row.scaled,
                    "lower_bound": row.lower_bound,
                    "converged": row.converged,
                    "diagnostics": row.diagnostics,
                })
            })
            .collect();
        r.diagnostics.push(format!(
            "sup of scaled column over n >= {}: {}",
            self.meta.n_window,
            self.meta.sup_scaled.map_or("unavailable".into(), |s| format!("{s:e}"))
        ));
        if let Some(cap) = self.meta.cap {
            r.diagnostics.push(format!(
                "first degree from which scaled values stay <= empirical cap {cap}: {}",
                self.meta.n_star_candidate.map_or("none in window".into(), |n| n.to_string())
            ));
        }
        r
    }
}

fn sweep_row(f: &TestFunction, n: usize, constraint: Option<&ShapeConstraint>, spec: &WeightSpec, alpha: f64) -> TableRow {
    match solve(f, n, constraint, spec, DEFAULT_TOL) {
        Ok(res) => TableRow {
            n,
            value: Some(res.error),
            scaled: Some((n as f64).powf(alpha) * res.error),
            lower_bound: Some(res.lower_bound),
            converged: res.converged,
            diagnostics: res.diagnostics,
        },
        Err(e) => TableRow {
            n,
            value: None,
            scaled: None,
            lower_bound: None,
            converged: false,
            diagnostics: vec![format!("solver failed: {e}")],
        },
    }
}

/// Best-approximation errors for `n_from..=n_to`. Degrees run in parallel;
/// a failing degree is recorded in its row without aborting the sweep.
pub fn sweep(
    f: &TestFunction,
    constraint: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    n_from: usize,
    n_to: usize,
    alpha: f64,
) -> Result<ErrorTable> {
    let min_from = constraint.map_or(1, |c| c.q() + 1);
    if n_from < min_from {
        return Err(Error::param("n_from", format!("must be at least {min_from}")));
    }
    if n_to < n_from || n_to > SWEEP_MAX_DEGREE {
        return Err(Error::param("n_to", format!("must lie in {n_from}..={SWEEP_MAX_DEGREE}")));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", "must be finite and >= 0"));
    }
    let rows: Vec<TableRow> = (n_from..=n_to)
        .into_par_iter()
        .map(|n| sweep_row(f, n, constraint, spec, alpha))
        .collect();
    let mut table = ErrorTable {
        meta: TableMeta {
            function: f.id().to_string(),
            params: f.params().clone(),
            constraint: constraint.cloned(),
            weight: spec.clone(),
            alpha,
            n_window: n_from,
            n_star_candidate: None,
            cap: None,
            sup_scaled: None,
        },
        rows,
    };
    table.meta.sup_scaled = table.sup_scaled_from(n_from);
    Ok(table)
}
