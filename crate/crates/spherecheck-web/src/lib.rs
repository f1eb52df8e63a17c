//! wasm-bindgen wrappers for the browser demo in `www/`. Every export takes
//! plain numbers or strings and returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never has to catch.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use spherecheck::gindex::{hj_resolution, parse_angle, torus_model_unchecked};
use spherecheck::sphere_enum::{enumerate_sphere_classes, SphereClassQuery};
use wasm_bindgen::prelude::*;

// Enumeration cost grows fast with N; the page stays responsive below this.
const MAX_N: usize = 10;

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

pub fn torus_model_json(theta1: &str, theta2: &str) -> Result<Value, String> {
    let t1 = parse_angle(theta1).map_err(|e| e.to_string())?;
    let t2 = parse_angle(theta2).map_err(|e| e.to_string())?;
    let m = torus_model_unchecked(t1, t2).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&m).map_err(|e| e.to_string())?;
    v["lefschetz_text"] = json!(m.lefschetz.to_string());
    v["signature_text"] = json!(m.signature.to_string());
    Ok(v)
}

pub fn resolve_json(m: i64, b: i64) -> Result<Value, String> {
    let r = hj_resolution(m, b).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&r).map_err(|e| e.to_string())?;
    v["du_val"] = json!(r.is_du_val());
    Ok(v)
}

pub fn sphere_count_json(n: usize, alpha: i64, a_min: i64, a_max: i64, area_bounded: bool) -> Result<Value, String> {
    if !(1..=MAX_N).contains(&n) {
        return Err(format!("N must be between 1 and {MAX_N} in the browser"));
    }
    if alpha < 1 || a_min > a_max || a_max > 12 {
        return Err("need alpha >= 1 and a_min <= a_max <= 12".into());
    }
    let q = SphereClassQuery { n, alpha, a_min, a_max, area_condition: area_bounded, allow_negative: a_min < 0 };
    let classes = enumerate_sphere_classes(&q);
    let mut strata: BTreeMap<i64, usize> = BTreeMap::new();
    for c in &classes {
        *strata.entry(c.a).or_default() += 1;
    }
    let sample: Vec<String> = classes.iter().take(40).map(|c| c.to_string()).collect();
    Ok(json!({
        "count": classes.len(),
        "strata": strata.iter().map(|(a, k)| json!({ "a": a, "count": k })).collect::<Vec<_>>(),
        "sample": sample,
    }))
}

#[wasm_bindgen]
pub fn torus_model(theta1: &str, theta2: &str) -> String {
    wrap(torus_model_json(theta1, theta2))
}

#[wasm_bindgen]
pub fn resolve(m: i32, b: i32) -> String {
    wrap(resolve_json(m as i64, b as i64))
}

#[wasm_bindgen]
pub fn sphere_count(n: u32, alpha: i32, a_min: i32, a_max: i32, area_bounded: bool) -> String {
    wrap(sphere_count_json(n as usize, alpha as i64, a_min as i64, a_max as i64, area_bounded))
}
