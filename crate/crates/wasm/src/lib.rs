//! WebAssembly bindings for the demo page in `www/`. Every export returns a
//! JSON string; failures come back as `{"error": "..."}`.

use besselhr::coeffs::{build_b_table, B_MAX_TERMS};
use besselhr::kernel::{bessel_kernel, j_real, KernelIndex, KernelMethod};
use besselhr::{RootOfUnity, SignVector, SpectralIndex, C64};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Kernel curves are capped so a slider drag stays interactive.
const MAX_POINTS: usize = 400;

fn parse_lambda(s: &str) -> Result<SpectralIndex, String> {
    let l = s
        .split(',')
        .map(|t| t.trim().parse::<C64>().map_err(|_| format!("bad complex number {:?}", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    SpectralIndex::new(l).map_err(|e| e.to_string())
}

fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn wrap(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// J(x;ς,λ) for x > 0.
pub fn evaluate_value(signs: &str, lambda: &str, x: f64, method: &str, tol: f64) -> Result<Value, String> {
    let s = SignVector::parse(signs.trim()).map_err(|e| e.to_string())?;
    let lam = parse_lambda(lambda)?;
    if lam.rank() != s.rank() {
        return Err(format!("{} signs but {} index components", s.rank(), lam.rank()));
    }
    if x <= 0.0 || !x.is_finite() {
        return Err("x must be positive".into());
    }
    let m: KernelMethod = method.parse().map_err(|e: besselhr::Error| e.to_string())?;
    let r = j_real(x, &s, &lam, m, tol).map_err(|e| e.to_string())?;
    Ok(json!({ "value": complex(r.value), "err": r.error_estimate, "method": r.method.as_str() }))
}

/// J_(λ,δ)(x) on `points` evenly spaced x in [lo, hi], skipping x = 0.
pub fn kernel_values(lambda: &str, delta: &str, lo: f64, hi: f64, points: usize) -> Result<Value, String> {
    let lam = parse_lambda(lambda)?;
    let delta = delta
        .split(',')
        .map(|d| d.trim().parse::<u8>().map_err(|_| format!("bad parity {:?}", d.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    let idx = KernelIndex::new(lam, delta).map_err(|e| e.to_string())?;
    if !(lo < hi) || points < 2 || points > MAX_POINTS {
        return Err(format!("need lo < hi and 2 <= points <= {MAX_POINTS}"));
    }
    let mut xs = Vec::new();
    let mut re = Vec::new();
    let mut im = Vec::new();
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        if x == 0.0 {
            continue;
        }
        let v = bessel_kernel(x, &idx, KernelMethod::Auto, 1e-8).map_err(|e| format!("x = {x}: {e}"))?;
        xs.push(x);
        re.push(v.result.value.re);
        im.push(v.result.value.im);
    }
    Ok(json!({ "x": xs, "re": re, "im": im }))
}

/// B_0..B_terms of the asymptotic expansion at the root of unity `xi`.
pub fn coefficient_values(lambda: &str, xi: &str, terms: usize) -> Result<Value, String> {
    let lam = parse_lambda(lambda)?;
    let xi = RootOfUnity::parse(lam.rank(), xi).map_err(|e| e.to_string())?;
    if terms > B_MAX_TERMS {
        return Err(format!("at most {B_MAX_TERMS} terms"));
    }
    let t = build_b_table(&lam, &xi, terms);
    Ok(json!({ "b": (0..=terms).map(|m| complex(t.get(m))).collect::<Vec<_>>() }))
}

#[wasm_bindgen]
pub fn evaluate(signs: &str, lambda: &str, x: f64, method: &str) -> String {
    wrap(evaluate_value(signs, lambda, x, method, 1e-10))
}

#[wasm_bindgen]
pub fn kernel_curve(lambda: &str, delta: &str, lo: f64, hi: f64, points: usize) -> String {
    wrap(kernel_values(lambda, delta, lo, hi, points))
}

#[wasm_bindgen]
pub fn coefficients(lambda: &str, xi: &str, terms: usize) -> String {
    wrap(coefficient_values(lambda, xi, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one() {
        let v = evaluate_value("+", "0", 1.0, "auto", 1e-10).unwrap();
        assert!((v["value"]["re"].as_f64().unwrap() - 1f64.cos()).abs() < 1e-12);
        assert!(evaluate_value("+-", "0", 1.0, "auto", 1e-10).is_err());
        assert!(evaluate("+", "0", -1.0, "auto").contains("error"));
    }

    #[test]
    fn kernel_curve_skips_zero() {
        let v = kernel_values("0.3i,-0.3i", "0,0", -2.0, 2.0, 5).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 4);
        assert!(kernel_values("0,0", "0,0", 1.0, 0.0, 5).is_err());
    }

    #[test]
    fn coefficients_start_at_one() {
        let v = coefficient_values("0.2,-0.2", "1", 5).unwrap();
        assert_eq!(v["b"][0]["re"], 1.0);
        assert_eq!(v["b"].as_array().unwrap().len(), 6);
    }
}
