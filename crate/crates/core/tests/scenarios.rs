use serde_json::json;
use spa_core::experiments::{run_scenario, Report, ScenarioConfig, SCENARIOS};

fn small(name: &str) -> ScenarioConfig {
    let text = match name {
        "chain" => json!({"functions": ["exp", "xabsx"], "alphas": [1.0], "n_from": 2, "n_to": 6}),
        "qmon-lift" => json!({"q": 1, "n_from": 3, "n_to": 6}),
        "compare-q12" => json!({"functions": ["exp"], "alphas": [1.0], "n_to": 8}),
        "pointwise-thm21" => json!({"functions": ["xabsx"], "n_from": 5, "n_to": 8}),
        "inverse-lemma22" => json!({"n_from": 4, "n_to": 8}),
        "thm31-comonotone" => json!({"ys": [0.0], "alphas": [2.0], "n_from": 2, "n_to": 8}),
        "q3-divergence" => json!({"n_from": 8, "n_to": 10}),
        "op117-probe" => json!({"functions": ["op117:eps=0.05"], "n_from": 6, "n_to": 8}),
        "thm13-ratio" => json!({"functions": ["exp"], "alphas": [1.0], "n_from": 2, "n_to": 6}),
        other => panic!("no small config for {other}"),
    };
    ScenarioConfig::from_json(&text.to_string()).unwrap()
}

#[test]
fn every_scenario_runs_on_a_small_window() {
    for &name in SCENARIOS {
        let r = run_scenario(name, &small(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(r.id, name);
        assert!(!r.rows.is_empty(), "{name}: no rows");
        assert!(!r.assertions.is_empty(), "{name}: no assertions");
        for a in &r.assertions {
            assert!(a.invariant.contains("::"), "{name}: invariant `{}`", a.invariant);
        }
        let report = r.into_report();
        let back: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert_eq!(report.command, format!("scenario {name}"));
    }
}

#[test]
fn small_chain_and_lift_pass() {
    for name in ["chain", "qmon-lift", "thm13-ratio"] {
        let r = run_scenario(name, &small(name)).unwrap();
        assert!(r.passed(), "{name}: {:?}", r.failures());
    }
}

#[test]
fn scenario_output_is_reproducible() {
    let cfg = small("chain");
    let a = run_scenario("chain", &cfg).unwrap().into_report().to_json();
    let b = run_scenario("chain", &cfg).unwrap().into_report().to_json();
    assert_eq!(a, b);
}

#[test]
fn bad_configs_are_rejected() {
    assert!(ScenarioConfig::from_json(r#"{"unknown": 1}"#).is_err());
    let cfg = ScenarioConfig::from_json(r#"{"n_from": 9, "n_to": 3}"#).unwrap();
    assert!(run_scenario("chain", &cfg).is_err());
    assert!(run_scenario("nope", &ScenarioConfig::default()).is_err());
}
