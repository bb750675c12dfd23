//! JSON-in, JSON-out entry points for the browser demo in `www/`.

use nnorm_core::fixedpoint::{banach_solve, SolveOptions};
use nnorm_core::lp::{self, BatchConfig};
use nnorm_core::nnorm::NormParams;
use nnorm_core::{gram_2_norm, is_linearly_independent, lp_n_norm, AnchorSet, Mapping};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

fn emit<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
struct NormRequest {
    vectors: Vec<Vec<f64>>,
    p: f64,
    /// Exponents at which to sample the norm for the p-curve.
    #[serde(default)]
    curve: Vec<f64>,
}

#[derive(Serialize)]
struct NormResponse {
    value: f64,
    independent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    gram: Option<f64>,
    curve: Vec<[f64; 2]>,
}

pub fn explore_norm(request: &str) -> Result<String, String> {
    let req: NormRequest = parse(request)?;
    let n = req.vectors.len();
    let d = req.vectors.first().map_or(0, Vec::len);
    let params = NormParams::new(n, req.p, d).map_err(|e| e.to_string())?;
    let value = lp_n_norm(&req.vectors, &params).map_err(|e| e.to_string())?;
    let independent = is_linearly_independent(&req.vectors, &params).map_err(|e| e.to_string())?;
    let gram = if req.p == 2.0 {
        gram_2_norm(&req.vectors).ok()
    } else {
        None
    };
    let curve = req
        .curve
        .iter()
        .map(|&p| {
            let params = params.reshaped(n, p, d)?;
            Ok([p, lp_n_norm(&req.vectors, &params)?])
        })
        .collect::<Result<Vec<_>, nnorm_core::Error>>()
        .map_err(|e| e.to_string())?;
    emit(&NormResponse {
        value,
        independent,
        gram,
        curve,
    })
}

#[derive(Deserialize)]
struct TraceRequest {
    map: Mapping,
    x0: Vec<f64>,
    #[serde(default)]
    anchors: Option<AnchorSet>,
    #[serde(default = "default_m")]
    m: usize,
    #[serde(default = "default_eps")]
    eps: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
}

fn default_m() -> usize {
    1
}
fn default_eps() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    500
}

#[derive(Serialize)]
struct TraceResponse {
    contraction: Option<f64>,
    #[serde(flatten)]
    result: nnorm_core::fixedpoint::FixedPointResult,
}

pub fn banach_trace(request: &str) -> Result<String, String> {
    let req: TraceRequest = parse(request)?;
    req.map.validate().map_err(|e| e.to_string())?;
    let d = req.x0.len();
    let anchors = match req.anchors {
        Some(y) => y,
        None => AnchorSet::standard_basis(d, d, 2.0).map_err(|e| e.to_string())?,
    };
    let contraction = req
        .map
        .certified_contraction(&anchors, req.m)
        .ok()
        .filter(|c| c.is_finite());
    let mut options = SolveOptions::new(req.eps, req.max_iter).with_trace(true);
    if let Some(c) = contraction {
        options = options.with_contraction(c);
    }
    let result = banach_solve(&req.map, &req.x0, &anchors, req.m, &options).map_err(|e| e.to_string())?;
    emit(&TraceResponse { contraction, result })
}

#[derive(Deserialize)]
struct SweepRequest {
    n: usize,
    p: f64,
    samples: usize,
    seed: u64,
}

/// Per-sample ratios `mid / lower` and `mid / upper`, the quantities a plot of
/// the equivalence band needs.
#[derive(Serialize)]
struct SweepPoint {
    d: usize,
    check: &'static str,
    lower_ratio: f64,
    upper_ratio: f64,
}

#[derive(Serialize)]
struct SweepResponse {
    pass: bool,
    checks: Vec<lp::CheckSummary>,
    points: Vec<SweepPoint>,
}

pub fn equivalence_sweep(request: &str) -> Result<String, String> {
    let req: SweepRequest = parse(request)?;
    let report = lp::run_batch(&BatchConfig::new(req.n, req.p, req.samples, req.seed)).map_err(|e| e.to_string())?;
    let points = report
        .rows
        .iter()
        .map(|r| SweepPoint {
            d: r.d,
            check: r.check,
            lower_ratio: r.mid / r.lower,
            upper_ratio: r.mid / r.upper,
        })
        .collect();
    emit(&SweepResponse {
        pass: report.pass,
        checks: report.checks,
        points,
    })
}

#[wasm_bindgen(js_name = exploreNorm)]
pub fn explore_norm_js(request: &str) -> Result<String, JsError> {
    explore_norm(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = banachTrace)]
pub fn banach_trace_js(request: &str) -> Result<String, JsError> {
    banach_trace(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = equivalenceSweep)]
pub fn equivalence_sweep_js(request: &str) -> Result<String, JsError> {
    equivalence_sweep(request).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn norm_explorer() {
        let out: Value = serde_json::from_str(
            &explore_norm(r#"{"vectors": [[1, 2, 0], [0, 1, 3]], "p": 2, "curve": [1, 2]}"#).unwrap(),
        )
        .unwrap();
        assert!((out["value"].as_f64().unwrap() - 46f64.sqrt()).abs() < 1e-12);
        assert!((out["gram"].as_f64().unwrap() - 46f64.sqrt()).abs() < 1e-12);
        assert_eq!(out["curve"][0][1], 10.0);
        assert!(explore_norm(r#"{"vectors": [[1, 2]], "p": 0.5}"#).is_err());
    }

    #[test]
    fn trace_of_a_halving_map() {
        let out: Value = serde_json::from_str(
            &banach_trace(r#"{"map": {"kind": "scaling", "c": 0.5}, "x0": [8, 8], "eps": 1e-6}"#).unwrap(),
        )
        .unwrap();
        assert_eq!(out["converged"], true);
        assert_eq!(out["contraction"], 0.5);
        let n = out["iterations"].as_u64().unwrap() as usize;
        assert_eq!(out["iterates"].as_array().unwrap().len(), n + 1);
        assert_eq!(out["apriori_bound_trace"].as_array().unwrap().len(), n);
        assert!(banach_trace(r#"{"map": {"kind": "scaling", "c": 3}, "x0": [1]}"#).is_err());
    }

    #[test]
    fn sweep_summary() {
        let out: Value =
            serde_json::from_str(&equivalence_sweep(r#"{"n": 2, "p": 1.5, "samples": 30, "seed": 4}"#).unwrap())
                .unwrap();
        assert_eq!(out["pass"], true);
        assert_eq!(out["points"].as_array().unwrap().len(), 90);
        for p in out["points"].as_array().unwrap() {
            assert!(p["lower_ratio"].as_f64().unwrap() >= 1.0 - 1e-9);
            assert!(p["upper_ratio"].as_f64().unwrap() <= 1.0 + 1e-9);
        }
    }
}
