//! `spa`: best uniform and shape-preserving polynomial approximation from the
//! command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use spa_core::catalog::parse_list;
use spa_core::constrained::ShapeConstraint;
use spa_core::experiments::{parse_function_ref, run_scenario, solve, svg_loglog, sweep, Assertion, Report, ScenarioConfig, MONOTONE_SLACK};
use spa_core::remez::{alternation_certificate, Certificate, DEFAULT_TOL};
use spa_core::theorems::{classify_regime, render_table, Cell, RegimeSymbol};
use spa_core::{Error, TestFunction, WeightSpec};

#[derive(Parser)]
#[command(name = "spa", version, about = "Shape-preserving best polynomial approximation on [-1, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weight {
    None,
    Phi,
    Delta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Out {
    Json,
    Csv,
    Text,
}

#[derive(clap::Args)]
struct FunctionArgs {
    /// Catalog function id.
    #[arg(long = "f")]
    f: String,
    /// Function parameter as key=value; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
}

#[derive(clap::Args)]
struct NormArgs {
    /// Weight exponent; also the scaling exponent of sweeps.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "none")]
    weight: Weight,
    /// Interpolate f at both endpoints.
    #[arg(long)]
    interp: bool,
}

#[derive(clap::Args)]
struct ShapeArgs {
    /// Order of the shape constraint.
    #[arg(long)]
    q: Option<usize>,
    /// Change points, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    ys: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Best approximation of degree < n.
    Approx {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
    },
    /// Best co-q-monotone approximation of degree < n.
    Constrained {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, allow_hyphen_values = true)]
        ys: Option<String>,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
    },
    /// Errors over a window of degrees.
    Sweep {
        #[command(flatten)]
        func: FunctionArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
        /// Write a log-log SVG plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Regime of (alpha, N, s).
    Classify {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "N")]
        n_cal: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Regime table for s change points.
    Tables {
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Run a named scenario.
    Scenario {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
    },
}

fn function(args: &FunctionArgs) -> Result<TestFunction, Error> {
    let mut spec = args.f.clone();
    if !args.params.is_empty() {
        spec.push(':');
        spec.push_str(&args.params.join(";"));
    }
    parse_function_ref(&spec)
}

fn weight(norm: &NormArgs) -> Result<WeightSpec, Error> {
    let spec = match norm.weight {
        Weight::None => WeightSpec::unweighted(),
        Weight::Phi => WeightSpec::phi(norm.alpha)?,
        Weight::Delta => WeightSpec::delta(norm.alpha, None)?,
    };
    Ok(if norm.interp { spec.with_interpolation(true, true) } else { spec })
}

fn constraint(q: usize, ys: Option<&str>) -> Result<ShapeConstraint, Error> {
    let ys = match ys {
        Some(s) => parse_list(s).map_err(|e| Error::Config(format!("--ys: {e}")))?,
        None => Vec::new(),
    };
    ShapeConstraint::new(q, ys)
}

fn inputs_of(func: &FunctionArgs, norm: &NormArgs) -> serde_json::Value {
    json!({
        "f": func.f, "params": func.params, "alpha": norm.alpha,
        "weight": match norm.weight { Weight::None => "none", Weight::Phi => "phi", Weight::Delta => "delta" },
        "interp": norm.interp,
    })
}

fn emit(report: &Report, out: Out) {
    match out {
        Out::Json => print!("{}", report.to_json()),
        Out::Csv => print!("{}", report.to_csv()),
        Out::Text => print!("{}", report.to_text()),
    }
}

/// Single-solve report shared by `approx` and `constrained`.
fn solve_report(
    command: &str,
    f: &TestFunction,
    n: usize,
    c: Option<&ShapeConstraint>,
    spec: &WeightSpec,
    alpha: f64,
    tol: f64,
    inputs: serde_json::Value,
) -> Result<Report, Error> {
    let res = solve(f, n, c, spec, tol)?;
    let mut report = Report::new(command, inputs);
    report.rows.push(json!({
        "n": n, "value": res.error, "scaled": (n as f64).powf(alpha) * res.error,
        "lower_bound": res.lower_bound, "converged": res.converged,
        "iterations": res.iterations, "coefficients": res.polynomial.coeffs(),
    }));
    report.diagnostics = res.diagnostics.clone();
    match &res.certificate {
        Certificate::Alternation(_) if res.converged => {
            let cert = alternation_certificate(&res, f);
            let detail = match &cert {
                Ok(a) => format!("{} alternation points", a.points.len()),
                Err(e) => format!("{e:?}"),
            };
            report.assertions.push(
                Assertion::holds("equioscillation", "remez::alternation_certificate", cert.is_ok())
                    .with_provenance("Remez exchange")
                    .with_detail(detail),
            );
        }
        Certificate::ActiveSet(a) => {
            if let Some(shape) = &a.shape {
                report.assertions.push(
                    Assertion::holds("shape", "constrained::output_in_shape_class", shape.feasible)
                        .with_provenance("derivative scan on the verification grid")
                        .with_detail(format!("min signed derivative {:e} at {}", shape.min_signed_value, shape.witness)),
                );
            }
        }
        _ => {}
    }
    Ok(report)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Approx { func, n, norm, tol, out } => {
            let f = function(&func)?;
            let spec = weight(&norm)?;
            let mut inputs = inputs_of(&func, &norm);
            inputs["n"] = json!(n);
            inputs["tol"] = json!(tol);
            let report = solve_report("approx", &f, n, None, &spec, norm.alpha, tol, inputs)?;
            emit(&report, out);
            Ok(report.passed())
        }
        Command::Constrained { func, n, q, ys, norm, tol, out } => {
            let f = function(&func)?;
            let spec = weight(&norm)?;
            let c = constraint(q, ys.as_deref())?;
            let mut inputs = inputs_of(&func, &norm);
            inputs["n"] = json!(n);
            inputs["q"] = json!(q);
            inputs["ys"] = json!(c.change_points());
            inputs["tol"] = json!(tol);
            let report = solve_report("constrained", &f, n, Some(&c), &spec, norm.alpha, tol, inputs)?;
            emit(&report, out);
            Ok(report.passed())
        }
        Command::Sweep { func, shape, n_from, n_to, norm, out, plot } => {
            let f = function(&func)?;
            let spec = weight(&norm)?;
            let c = match shape.q {
                Some(q) => Some(constraint(q, shape.ys.as_deref())?),
                None if shape.ys.is_some() => return Err(Error::Config("--ys needs --q".into())),
                None => None,
            };
            let table = sweep(&f, c.as_ref(), &spec, n_from, n_to, norm.alpha)?;
            let mut inputs = inputs_of(&func, &norm);
            inputs["n_from"] = json!(n_from);
            inputs["n_to"] = json!(n_to);
            inputs["q"] = json!(shape.q);
            inputs["ys"] = json!(c.as_ref().map(|c| c.change_points().to_vec()));
            let mut report = table.to_report("sweep", inputs);
            if spec.is_unweighted() {
                report.assertions.push(
                    Assertion::holds(
                        "values non-increasing in n",
                        "experiments::sweep_values_non_increasing",
                        table.is_non_increasing(MONOTONE_SLACK),
                    )
                    .with_provenance(if c.is_some() { "cutting-plane LP" } else { "Remez exchange" }),
                );
            }
            if let Some(path) = plot {
                let data: Vec<(f64, f64)> = table
                    .rows
                    .iter()
                    .filter_map(|r| r.value.map(|v| (r.n as f64, v)))
                    .collect();
                let label = match &c {
                    Some(c) => format!("E_n^({}) {}", c.q(), func.f),
                    None => format!("E_n {}", func.f),
                };
                std::fs::write(&path, svg_loglog(&format!("{} ({})", func.f, spec.label()), &[(label, data)]))
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            }
            emit(&report, out);
            Ok(report.passed())
        }
        Command::Classify { alpha, n_cal, s, out } => {
            if !(alpha > 0.0 && alpha.is_finite()) || n_cal == 0 {
                return Err(Error::Config("need alpha > 0 and N >= 1".into()));
            }
            let regime = classify_regime(alpha, n_cal, s);
            let symbol = match regime {
                RegimeSymbol::Plus => Cell::Plus,
                RegimeSymbol::Oplus => Cell::Oplus,
                RegimeSymbol::Ominus => Cell::Ominus,
            };
            match out {
                Out::Text => println!("{regime}"),
                _ => {
                    let mut report = Report::new("classify", json!({"alpha": alpha, "N": n_cal, "s": s}));
                    report.rows.push(json!({"alpha": alpha, "N": n_cal, "s": s, "regime": regime, "symbol": symbol.ascii()}));
                    emit(&report, out);
                }
            }
            Ok(true)
        }
        Command::Tables { s, out } => {
            let table = render_table(s);
            match out {
                Out::Text => print!("{}", table.to_text()),
                Out::Csv => print!("{}", table.to_csv()),
                Out::Json => {
                    let mut report = Report::new("tables", json!({"s": s}));
                    report.rows = table
                        .ascii_rows()
                        .into_iter()
                        .enumerate()
                        .map(|(i, r)| json!({"row": i + 1, "cells": r}))
                        .collect();
                    report.diagnostics.push(format!("row convention: {:?}", table.convention));
                    emit(&report, out);
                }
            }
            Ok(true)
        }
        Command::Scenario { name, config, out } => {
            let cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                    ScenarioConfig::from_json(&text)?
                }
                None => ScenarioConfig::default(),
            };
            let report = run_scenario(&name, &cfg)?.into_report();
            emit(&report, out);
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("spa: {e}");
            match e {
                Error::Solver(_) | Error::Lp(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
