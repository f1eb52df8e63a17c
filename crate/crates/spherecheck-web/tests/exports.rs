use serde_json::Value;
use spherecheck_web::{resolve, sphere_count, torus_model};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn torus_model_export() {
    let v = parse(torus_model("1/2", "1/2"));
    assert_eq!(v["lefschetz_text"], "16");
    assert_eq!(v["integral"], true);
    let v = parse(torus_model("1/9", "2/9"));
    assert_eq!(v["integral"], false);
    assert!(parse(torus_model("x", "1/2"))["error"].is_string());
}

#[test]
fn resolve_export() {
    let v = parse(resolve(8, 3));
    assert_eq!(v["chain"], serde_json::json!([3, 3]));
    assert_eq!(v["delta_k2"], "-1");
    assert_eq!(parse(resolve(5, 4))["du_val"], true);
    assert!(parse(resolve(6, 3))["error"].is_string());
}

#[test]
fn sphere_count_export() {
    assert_eq!(parse(sphere_count(9, 2, 0, 0, false))["count"], 72);
    let v = parse(sphere_count(9, 2, 0, 12, true));
    assert_eq!(v["count"], 312);
    assert_eq!(v["strata"].as_array().unwrap().len(), 4);
    assert!(parse(sphere_count(40, 2, 0, 3, false))["error"].is_string());
}
