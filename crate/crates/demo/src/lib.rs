//! Browser bindings. Every entry point takes plain values and returns a JSON
//! string, or throws a string error on the JavaScript side.

use ggs_core::ggs::{DefiningVector, OrderMode};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Portraits beyond this many labels are refused; the page draws every vertex.
const PORTRAIT_LIMIT: usize = 4096;

fn vector(spec: &str) -> Result<DefiningVector, String> {
    spec.parse().map_err(|e: ggs_core::error::Error| e.to_string())
}

pub fn classify_json(spec: &str) -> Result<String, String> {
    let v = vector(spec)?;
    let inv = v.invariants();
    let mut out = json!({ "vector": v.to_string(), "invariants": inv });
    if inv.infinite && inv.periodic && v.n() >= 2 {
        if let Ok(t) = v.lambda_prime(Default::default()) {
            out["thresholds"] = json!(t);
        }
    }
    Ok(out.to_string())
}

/// Closed-form order of `a^(i p^r) b^(j p^s)` next to the leaf-permutation order.
pub fn order_json(spec: &str, r: u32, s: u32, i: i32, j: i32) -> Result<String, String> {
    let v = vector(spec)?;
    let profile = v.t_sequence(r, s).map_err(|e| e.to_string())?;
    let c = v
        .order_of(r, s, i.into(), j.into(), profile.m_rs + 3, OrderMode::Both)
        .map_err(|e| e.to_string())?;
    Ok(json!({ "comparison": c, "profile": profile, "agree": c.agree() }).to_string())
}

/// Labels of `a^(i p^r) b^(j p^s)` level by level, as exponents of the root cycle.
pub fn portrait_json(spec: &str, r: u32, s: u32, i: i32, j: i32, depth: u32) -> Result<String, String> {
    let v = vector(spec)?;
    let shape = v.shape(depth).map_err(|e| e.to_string())?;
    if shape.internal_count() > PORTRAIT_LIMIT {
        return Err(format!("portrait too large at depth {depth}"));
    }
    let g = v
        .power_product(r, s, i.into(), j.into(), depth)
        .map_err(|e| e.to_string())?;
    let levels: Vec<&[u8]> = (0..depth)
        .map(|l| {
            let off = shape.level_offset(l);
            &g.labels()[off..off + shape.level_size(l)]
        })
        .collect();
    Ok(json!({ "d": v.d(), "depth": depth, "order": g.order(), "levels": levels }).to_string())
}

#[wasm_bindgen]
pub fn classify(spec: &str) -> Result<String, JsValue> {
    classify_json(spec).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn order(spec: &str, r: u32, s: u32, i: i32, j: i32) -> Result<String, JsValue> {
    order_json(spec, r, s, i, j).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn portrait(spec: &str, r: u32, s: u32, i: i32, j: i32, depth: u32) -> Result<String, JsValue> {
    portrait_json(spec, r, s, i, j, depth).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn classify_reports_thresholds() {
        let v = parse(classify_json("p=2 n=2 e=1,0,1").unwrap());
        assert_eq!(v["invariants"]["periodic"], true);
        assert_eq!(v["thresholds"]["m_g"], 6);
        assert!(classify_json("p=2 n=2 e=0,0,0").is_err());
    }

    #[test]
    fn order_formula_matches() {
        let v = parse(order_json("p=2 n=2 e=1,0,1", 0, 0, 1, 1).unwrap());
        assert_eq!(v["comparison"]["formula"], 32);
        assert_eq!(v["agree"], true);
        assert!(order_json("p=2 n=2 e=1,0,1", 0, 0, 2, 1).is_err());
    }

    #[test]
    fn portrait_of_b() {
        // b = a^0 b^1: first-level labels are the defining vector
        let v = parse(portrait_json("p=2 n=2 e=1,0,1", 0, 0, 0, 1, 3).unwrap());
        let levels = v["levels"].as_array().unwrap();
        assert_eq!(levels.len(), 3);
        assert_eq!(levels[0], json!([0]));
        assert_eq!(levels[1], json!([1, 0, 1, 0]));
        assert!(portrait_json("p=2 n=2 e=1,0,1", 0, 0, 1, 1, 9).is_err());
    }
}
