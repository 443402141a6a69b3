//! Dense dual simplex against minilp on random bounded programs.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spa_core::lp::{lp_solve, LinearProgram, LpError, LpRow};

const BOX: f64 = 10.0;

struct Instance {
    objective: Vec<f64>,
    ge: Vec<(Vec<f64>, f64)>,
    eq: Vec<(Vec<f64>, f64)>,
}

/// Feasible by construction: every row holds at a random interior point.
fn random_instance(rng: &mut ChaCha8Rng, vars: usize, ge_rows: usize, eq_rows: usize) -> Instance {
    let x0: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dot = |a: &[f64]| a.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
    let objective = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ge = (0..ge_rows)
        .map(|_| {
            let a: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = dot(&a) - rng.gen_range(0.0..2.0);
            (a, b)
        })
        .collect();
    let eq = (0..eq_rows)
        .map(|_| {
            let a: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = dot(&a);
            (a, b)
        })
        .collect();
    Instance { objective, ge, eq }
}

fn ours(inst: &Instance) -> LinearProgram {
    let n = inst.objective.len();
    let mut lp = LinearProgram::new(inst.objective.clone());
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        lp.push(LpRow::ge(e.clone(), -BOX));
        e[i] = -1.0;
        lp.push(LpRow::ge(e, -BOX));
    }
    for (a, b) in &inst.ge {
        lp.push(LpRow::ge(a.clone(), *b));
    }
    for (a, b) in &inst.eq {
        lp.push(LpRow::eq(a.clone(), *b));
    }
    lp
}

fn reference(inst: &Instance) -> f64 {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = inst.objective.iter().map(|&c| p.add_var(c, (-BOX, BOX))).collect();
    let expr = |a: &[f64]| vars.iter().copied().zip(a.iter().copied()).collect::<Vec<_>>();
    for (a, b) in &inst.ge {
        p.add_constraint(expr(a).as_slice(), ComparisonOp::Ge, *b);
    }
    for (a, b) in &inst.eq {
        p.add_constraint(expr(a).as_slice(), ComparisonOp::Eq, *b);
    }
    p.solve().expect("reference solve").objective()
}

fn max_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    lp.rows
        .iter()
        .map(|r| {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, x)| a * x).sum();
            let slack = lhs - r.rhs;
            if r.kind == spa_core::lp::RowKind::Ge { (-slack).max(0.0) } else { slack.abs() }
        })
        .fold(0.0, f64::max)
}

#[test]
fn random_programs_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..60 {
        let vars = rng.gen_range(2..=20);
        let rows = rng.gen_range(vars..=3 * vars);
        let inst = random_instance(&mut rng, vars, rows, case % 3);
        let lp = ours(&inst);
        let sol = lp_solve(&lp, None).unwrap_or_else(|e| panic!("case {case}: {e:?}"));
        let want = reference(&inst);
        assert!(
            (sol.objective - want).abs() <= 1e-7 * (1.0 + want.abs()),
            "case {case}: {} vs {want}",
            sol.objective
        );
        assert!(max_violation(&lp, &sol.x) <= 1e-8, "case {case}: infeasible point");
    }
}

#[test]
fn warm_start_after_appending_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..20 {
        let inst = random_instance(&mut rng, 12, 30, 0);
        let mut lp = ours(&inst);
        let first = lp_solve(&lp, None).unwrap();
        let extra = random_instance(&mut rng, 12, 0, 0);
        // Cut off the current optimum with a row that the box still satisfies.
        let a: Vec<f64> = extra.objective.clone();
        let at_opt: f64 = a.iter().zip(&first.x).map(|(a, x)| a * x).sum();
        lp.push(LpRow::ge(a, at_opt + 0.1));
        let warm = lp_solve(&lp, Some(&first.basis));
        let cold = lp_solve(&lp, None);
        match (warm, cold) {
            (Ok(w), Ok(c)) => assert!((w.objective - c.objective).abs() <= 1e-8 * (1.0 + c.objective.abs()), "case {case}"),
            (Err(LpError::Infeasible), Err(LpError::Infeasible)) => {}
            (w, c) => panic!("case {case}: warm {:?} cold {:?}", w.map(|s| s.objective), c.map(|s| s.objective)),
        }
    }
}

#[test]
fn infeasible_and_unbounded_are_reported() {
    let mut lp = LinearProgram::new(vec![1.0]);
    lp.push(LpRow::ge(vec![1.0], 1.0));
    lp.push(LpRow::ge(vec![-1.0], 0.0));
    assert!(matches!(lp_solve(&lp, None), Err(LpError::Infeasible)));

    let mut lp = LinearProgram::new(vec![1.0]);
    lp.push(LpRow::ge(vec![-1.0], 0.0));
    assert!(matches!(lp_solve(&lp, None), Err(LpError::Unbounded)));
}
