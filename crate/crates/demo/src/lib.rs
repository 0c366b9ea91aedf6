//! Browser bindings: spectrum listing, approximate volumes of domains of
//! influence on the interval, and a full interval reconstruction. Every export
//! returns a JSON string; errors come back as `{"error": "..."}`.

use gelfand_core::forward::{build_disk_model, build_interval_model, build_rectangle_model, true_volume};
use gelfand_core::harness::{self, ExperimentConfig};
use gelfand_core::volume::VolumeOracle;
use gelfand_core::Result;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn spectrum_json(kind: &str, a: f64, b: f64, j: usize) -> Result<Value> {
    let (_, ds) = match kind {
        "interval" => build_interval_model(a, j)?,
        "rectangle" => build_rectangle_model(a, b, j)?,
        "disk" => build_disk_model(a, j)?,
        other => return Err(gelfand_core::Error::arg("kind", format!("unknown model `{other}`"))),
    };
    Ok(json!({ "lambda": ds.lambdas() }))
}

/// First `j` Neumann eigenvalues. `a`, `b` are the lengths (interval uses
/// `a`) or the radius `a` for the disk.
#[wasm_bindgen]
pub fn spectrum(kind: &str, a: f64, b: f64, j: usize) -> String {
    respond(spectrum_json(kind, a, b, j))
}

fn interval_config(eta: f64, j: usize, delta: f64, seed: u64) -> Result<ExperimentConfig> {
    harness::preset("interval-pi-1")?.with_overrides(&[
        ("eta".into(), eta.to_string()),
        ("J".into(), j.to_string()),
        ("delta".into(), delta.to_string()),
        ("seed".into(), seed.to_string()),
    ])
}

fn volume_json(alpha: &[f64], j: usize, delta: f64) -> Result<Value> {
    let cfg = interval_config(0.4, j, delta, 1)?;
    let (model, exact) = harness::build_model(&cfg)?;
    let ds = harness::observed_dataset(&cfg, &exact)?;
    let part = harness::partition(&cfg, &model)?;
    let oracle = VolumeOracle::new(&ds, &part, harness::volume_params(&cfg), model.diameter)?;
    let r = oracle.vol_a(alpha)?;
    Ok(json!({
        "vol_a": r.vol_a,
        "vol_true": true_volume(&model, &part, &r.alpha),
        "alpha": r.alpha,
        "iterations": r.iterations,
        "tolerance": r.tolerance,
    }))
}

/// Approximate volume of the domain of influence on `[0, π]` with radii
/// `a0` (whole boundary), `a1` (x = 0) and `a2` (x = π).
#[wasm_bindgen]
pub fn interval_volume(a0: f64, a1: f64, a2: f64, j: usize, delta: f64) -> String {
    respond(volume_json(&[a0, a1, a2], j, delta))
}

fn reconstruct_json(eta: f64, j: usize, delta: f64, seed: u64) -> Result<Value> {
    let cfg = interval_config(eta, j, delta, seed)?;
    let (model, exact) = harness::build_model(&cfg)?;
    let ds = harness::observed_dataset(&cfg, &exact)?;
    let part = harness::partition(&cfg, &model)?;
    let rec = harness::reconstruct(&cfg, &model, &ds, &part)?;
    let values: Vec<Vec<f64>> = rec.rstar.functions.iter().map(|f| f.values.clone()).collect();
    let report = harness::evaluate(&cfg, &model, &part, &values)?;
    Ok(json!({ "report": report, "points": values, "length": std::f64::consts::PI }))
}

/// Reconstructs `[0, π]` and returns the evaluation report plus every
/// accepted boundary distance function `(d(x, 0), d(x, π))`.
#[wasm_bindgen]
pub fn reconstruct_interval(eta: f64, j: usize, delta: f64, seed: u32) -> String {
    respond(reconstruct_json(eta, j, delta, seed as u64))
}
