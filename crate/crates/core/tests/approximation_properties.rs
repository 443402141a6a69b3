use proptest::prelude::*;
use spa_core::catalog::{get_function, list_catalog, Params, TestFunction};
use spa_core::chebcore::ChebPoly;
use spa_core::constrained::{best_constrained, is_co_q_monotone, ShapeConstraint, SHAPE_TOL};
use spa_core::lift::lift_q_monotone;
use spa_core::remez::{best_unconstrained, DEFAULT_TOL};
use spa_core::weights::WeightSpec;

fn exp() -> TestFunction {
    get_function("exp", &Params::new()).unwrap()
}

fn shifted(f: &TestFunction, p: ChebPoly, scale: f64) -> TestFunction {
    let g = f.clone();
    TestFunction::from_fn("shifted", move |x| scale * g.eval(x) + p.eval_unchecked(x)).with_kinks(f.kink_points().to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_ignores_low_degree_terms_and_scales(
        n in 2usize..10,
        coeffs in proptest::collection::vec(-2.0f64..2.0, 1..10),
        scale in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
    ) {
        let f = get_function("abs", &Params::new()).unwrap();
        let base = best_unconstrained(&f, n, DEFAULT_TOL).unwrap();
        let p = ChebPoly::new(coeffs.into_iter().take(n).collect());
        let g = shifted(&f, p, scale);
        let r = best_unconstrained(&g, n, DEFAULT_TOL).unwrap();
        prop_assert!((r.error - scale.abs() * base.error).abs() <= 1e-8 * (1.0 + base.error));
    }

    #[test]
    fn errors_do_not_increase_with_degree(idx in 0usize..12, n in 1usize..15) {
        let id = &list_catalog()[idx].id;
        let f = get_function(id, &Params::new()).unwrap();
        let a = best_unconstrained(&f, n, DEFAULT_TOL).unwrap();
        let b = best_unconstrained(&f, n + 1, DEFAULT_TOL).unwrap();
        prop_assert!(b.error <= a.error * (1.0 + 1e-8) + 1e-14, "{id} n={n}: {} then {}", a.error, b.error);
    }

    #[test]
    fn constrained_dominates_and_is_feasible(q in 1usize..=3, y in -0.8f64..0.8, n in 4usize..9) {
        let f = exp();
        let c = ShapeConstraint::new(q, vec![y]).unwrap();
        let u = best_unconstrained(&f, n, DEFAULT_TOL).unwrap();
        let k = best_constrained(&f, n, Some(&c), &WeightSpec::unweighted(), DEFAULT_TOL).unwrap();
        prop_assert!(k.error >= u.error - 1e-9 * (1.0 + u.error));
        prop_assert!(k.lower_bound <= k.error + 1e-12);
        prop_assert!(is_co_q_monotone(&k.polynomial, &c, 4001, SHAPE_TOL * 10.0).feasible);
    }

    #[test]
    fn comonotone_errors_bound_the_plain_error_for_abs(n in 3usize..9, y in -0.7f64..0.7) {
        let f = get_function("abs", &Params::new()).unwrap();
        let u = best_unconstrained(&f, n, DEFAULT_TOL).unwrap().error;
        for ys in [vec![], vec![y]] {
            let c = ShapeConstraint::new(1, ys).unwrap();
            let k = best_constrained(&f, n, Some(&c), &WeightSpec::unweighted(), DEFAULT_TOL).unwrap();
            prop_assert!(k.error >= u - 1e-9);
        }
    }
}

#[test]
fn lift_meets_its_bound_for_exp() {
    for q in 1..=3 {
        for n in q + 2..=14 {
            let (p, rep) = lift_q_monotone(&exp(), q, n).unwrap();
            assert!(rep.achieved_error <= rep.guaranteed_bound + 1e-8, "q={q} n={n}");
            assert!(rep.shape.feasible, "q={q} n={n}");
            assert!(p.degree_bound() <= n);
        }
    }
}

#[test]
fn monotone_approximation_of_decreasing_line_is_constant() {
    let f = TestFunction::from_poly("neg_x", ChebPoly::new(vec![0.0, -1.0]));
    let c = ShapeConstraint::new(1, vec![]).unwrap();
    for n in 1..=10 {
        let r = best_constrained(&f, n, Some(&c), &WeightSpec::unweighted(), DEFAULT_TOL).unwrap();
        assert!((r.error - 1.0).abs() <= 1e-8);
        assert!(r.polynomial.trimmed().degree() == 0 || r.polynomial.coeffs()[1..].iter().all(|c| c.abs() < 1e-8));
    }
}
