//! Report schema shared by every command, with JSON, CSV, text and SVG output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Columns written for degree tables.
pub const TABLE_COLUMNS: [&str; 5] = ["n", "value", "scaled", "lower_bound", "converged"];

/// One checked property with its evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// Invariant under test, as `module::property`.
    pub invariant: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    /// Where the compared quantities come from.
    pub provenance: String,
    pub detail: String,
}

impl Assertion {
    fn make(name: &str, invariant: &str, passed: bool, value: Option<f64>, threshold: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            invariant: invariant.to_string(),
            passed,
            value,
            threshold,
            provenance: String::new(),
            detail: String::new(),
        }
    }

    /// Passes when `value <= threshold`; NaN fails.
    pub fn at_most(name: &str, invariant: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, invariant, value <= threshold, Some(value), Some(threshold))
    }

    /// Passes when `value > threshold`; NaN fails.
    pub fn greater_than(name: &str, invariant: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, invariant, value > threshold, Some(value), Some(threshold))
    }

    pub fn holds(name: &str, invariant: &str, ok: bool) -> Self {
        Self::make(name, invariant, ok, None, None)
    }

    pub fn with_provenance(mut self, p: &str) -> Self {
        self.provenance = p.to_string();
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// `{schema_version, command, inputs, rows[], assertions[], diagnostics}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Value,
    pub rows: Vec<Value>,
    pub assertions: Vec<Assertion>,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            rows: Vec::new(),
            assertions: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are serializable");
        s.push('\n');
        s
    }

    /// Degree tables use [`TABLE_COLUMNS`]; other rows use the sorted union
    /// of their keys.
    pub fn to_csv(&self) -> String {
        let is_table = !self.rows.is_empty()
            && self.rows.iter().all(|r| r.get("n").is_some() && r.get("value").is_some());
        let columns: Vec<String> = if is_table {
            TABLE_COLUMNS.iter().map(|c| c.to_string()).collect()
        } else {
            let mut keys: Vec<String> = self
                .rows
                .iter()
                .filter_map(Value::as_object)
                .flat_map(|m| m.keys().cloned())
                .collect();
            keys.sort();
            keys.dedup();
            keys
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&columns).expect("in-memory write");
        for row in &self.rows {
            let rec: Vec<String> = columns.iter().map(|c| cell(row.get(c))).collect();
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        for row in &self.rows {
            match row.as_object() {
                Some(m) => {
                    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}={}", cell(Some(v)))).collect();
                    out.push_str(&format!("  {}\n", parts.join(" ")));
                }
                None => out.push_str(&format!("  {}\n", cell(Some(row)))),
            }
        }
        for a in &self.assertions {
            let status = if a.passed { "PASS" } else { "FAIL" };
            let value = match (a.value, a.threshold) {
                (Some(v), Some(t)) => format!(" value={v:e} threshold={t:e}"),
                (Some(v), None) => format!(" value={v:e}"),
                _ => String::new(),
            };
            out.push_str(&format!("{status} {} [{}]{value}\n", a.name, a.invariant));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("note: {d}\n"));
        }
        out
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log plot of degree against error, one polyline per series. Points with
/// non-positive coordinates are skipped.
pub fn svg_loglog(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if lo.is_finite() {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = {
        let (lo, hi) = pts.iter().map(|p| p.0).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) }
    };
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str(&format!("<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n", w / 2.0, escape(title)));
    s.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        w - 2.0 * m,
        h - 2.0 * m
    ));
    let mut d = y0;
    while d <= y1 + 1e-9 {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{}</text>\n",
            m - 6.0,
            sy(d) + 4.0,
            d as i64
        ));
        d += 1.0;
    }
    s.push_str(&format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">n</text>\n", w / 2.0, h - 16.0));
    for (i, (label, data)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            w - m + 4.0 - 120.0,
            m + 16.0 + 14.0 * i as f64,
            escape(label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
