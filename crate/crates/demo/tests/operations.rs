use ftl_arena_demo::{convexity_probe_json, ellipse_geometry_json, regret_curves_json, MAX_ROUNDS};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn regret_curves_have_one_series_per_learner() {
    let v = parse(regret_curves_json(1.0, 0.0, 4.0, "stochastic", 0.1, 1000, 3).unwrap());
    let t = v["t"].as_array().unwrap();
    assert!(t.len() <= 200 && t.last().unwrap().as_u64() == Some(1000));
    let series = v["series"].as_array().unwrap();
    let labels: Vec<&str> = series.iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["ftl", "ftrl", "abprod"]);
    for s in series {
        assert_eq!(s["regret"].as_array().unwrap().len(), t.len());
    }
}

#[test]
fn same_seed_gives_same_curves() {
    let a = regret_curves_json(2.0, 0.5, 1.0, "stochastic", 0.0, 500, 8).unwrap();
    let b = regret_curves_json(2.0, 0.5, 1.0, "stochastic", 0.0, 500, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(regret_curves_json(1.0, 0.0, 1.0, "stochastic", 0.1, MAX_ROUNDS + 1, 0).is_err());
    assert!(regret_curves_json(1.0, 0.0, 1.0, "oracle", 0.1, 10, 0).is_err());
    // not positive definite
    assert!(ellipse_geometry_json(1.0, 2.0, 1.0, 0.0).is_err());
}

#[test]
fn axis_aligned_ellipse_geometry() {
    // semi-axes 1 and 1/2
    let v = parse(ellipse_geometry_json(1.0, 0.0, 4.0, std::f64::consts::FRAC_PI_2).unwrap());
    let p = v["support_point"].as_array().unwrap();
    assert!(p[0].as_f64().unwrap().abs() < 1e-12);
    assert!((p[1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["support_value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    // curvature at the minor-axis end is (minor)/(major)² = 0.5/1
    assert!((v["curvature"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    // the major-axis end has curvature 1/(1/2)² = 4, so the minimum is 1/2
    assert!((v["lambda0"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["outline"].as_array().unwrap().len(), 128);
}

#[test]
fn convexity_probe_holds_at_lambda0_and_fails_above() {
    let at = parse(convexity_probe_json(1.0, 0.3, 3.0, 1.0, 20_000, 5).unwrap());
    assert_eq!(at["holds"], Value::Bool(true), "{}", at["detail"]);
    let above = parse(convexity_probe_json(1.0, 0.3, 3.0, 1.5, 200_000, 5).unwrap());
    assert_eq!(above["holds"], Value::Bool(false), "{}", above["detail"]);
}
