//! Browser bindings for the calibration demo page in `www/`.
//!
//! Each exported function has a plain Rust counterpart in [`ops`] so the
//! behaviour can be tested natively.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

/// Calibrated scores for one frame, given its raw posteriors.
#[wasm_bindgen]
pub fn calibrate(posteriors: Vec<f64>, temperature: f64, k: usize) -> Result<Vec<f64>, JsValue> {
    ops::calibrate(&posteriors, temperature, k).map_err(js_err)
}

/// Scores one of the built-in "dyr" attempts; returns the scored transcript as JSON.
#[wasm_bindgen]
pub fn score_fixture(
    name: &str,
    temperature: f64,
    k: usize,
    theta: f64,
) -> Result<String, JsValue> {
    ops::score_fixture(name, temperature, k, theta).map_err(js_err)
}

/// Precision and recall on a synthetic corpus at each temperature, as JSON.
#[wasm_bindgen]
pub fn sweep_curve(
    temperatures: Vec<f64>,
    utterances: usize,
    seed: u64,
) -> Result<String, JsValue> {
    ops::sweep_curve(&temperatures, utterances, seed).map_err(js_err)
}
