//! Browser bindings. Each operation is a plain Rust function returning a serializable
//! result; the `wasm_bindgen` wrappers hand that result to JavaScript as JSON.

use attractorlab_core::diagnostics::attraction::{lamb_attraction, RunParams};
use attractorlab_core::diffraction::{fringe_geometry, kirchhoff_amplitude, ApertureSpec, ScreenSpec};
use attractorlab_core::initial::RandomData;
use attractorlab_core::stationary::solve_stationary_orbit;
use attractorlab_core::{Complex64, Grid1D, ModelSpec, NonlinearitySpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest Lamb run the page will start; longer runs freeze the tab.
pub const MAX_LAMB_TIME: f64 = 200.0;

#[derive(Debug, Clone, Serialize)]
pub struct OrbitProfile {
    pub omega: f64,
    pub kappa: f64,
    pub amplitude: f64,
    pub x: Vec<f64>,
    pub profile: Vec<f64>,
    pub continuum: Vec<f64>,
}

/// Stationary orbit of the U(1) model with `a(s) = a0 + a1 s`.
pub fn orbit_profile(omega: f64, a0: f64, a1: f64, half_width: f64) -> Result<OrbitProfile, String> {
    let model = ModelSpec::kgu1(1.0, NonlinearitySpec::u1(vec![a0, a1]));
    let grid = Grid1D::symmetric(half_width, 0.05).map_err(|e| e.to_string())?;
    let orbit = solve_stationary_orbit(&model, omega, &grid).map_err(|e| e.to_string())?;
    Ok(OrbitProfile {
        omega,
        kappa: orbit.kappa,
        amplitude: orbit.amplitude,
        x: grid.nodes(),
        continuum: orbit.continuum_profile(),
        profile: orbit.profile,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FringePattern {
    pub x1: Vec<f64>,
    pub density: Vec<f64>,
    pub spacing: f64,
    pub expected_spacing: f64,
}

/// Two-slit intensity on the line `x2 = 0` of a screen at `distance`.
pub fn two_slit_pattern(k: f64, width: f64, separation: f64, distance: f64) -> Result<FringePattern, String> {
    let slits = ApertureSpec::TwoSlits { width, separation, height: 4.0 * width.max(separation) };
    let half = 0.25 * distance;
    let screen = ScreenSpec::new(distance, [half, 0.0], [1201, 1]);
    let amp = kirchhoff_amplitude(&slits, k, Complex64::new(1.0, 0.0), &screen).map_err(|e| e.to_string())?;
    let geometry = fringe_geometry(&slits, &amp).map_err(|e| e.to_string())?;
    Ok(FringePattern {
        x1: amp.x1.clone(),
        density: amp.samples().iter().map(|a| a.norm_sqr()).collect(),
        spacing: geometry.spacing,
        expected_spacing: geometry.expected_spacing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambTrace {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub limit: f64,
    pub limit_error: f64,
    pub converged: bool,
}

/// Oscillator trace of the string with `F(y) = y − y³` from seeded random data.
pub fn lamb_trace(seed: u64, energy: f64, t_final: f64) -> Result<LambTrace, String> {
    if !(t_final > 0.0 && t_final <= MAX_LAMB_TIME) {
        return Err(format!("t_final must lie in (0, {MAX_LAMB_TIME}]"));
    }
    let model = ModelSpec::lamb_string(NonlinearitySpec::bistable());
    let params = RunParams { sample_every: 0.25, ..RunParams::new(t_final) };
    let data = RandomData { energy, ..Default::default() };
    let report = lamb_attraction(&model, &params, &data, seed).map_err(|e| e.to_string())?;
    let stride = (report.trace.len() / 2000).max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect();
    Ok(LambTrace {
        t: pick(&report.trace.times),
        y: pick(&report.trace.real_values()),
        limit: report.metrics["limit_value"],
        limit_error: report.metrics["limit_error"],
        converged: report.verdicts["converged"],
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = orbitProfile)]
pub fn orbit_profile_js(omega: f64, a0: f64, a1: f64, half_width: f64) -> Result<String, JsValue> {
    to_js(orbit_profile(omega, a0, a1, half_width))
}

#[wasm_bindgen(js_name = twoSlitPattern)]
pub fn two_slit_pattern_js(k: f64, width: f64, separation: f64, distance: f64) -> Result<String, JsValue> {
    to_js(two_slit_pattern(k, width, separation, distance))
}

#[wasm_bindgen(js_name = lambTrace)]
pub fn lamb_trace_js(seed: u32, energy: f64, t_final: f64) -> Result<String, JsValue> {
    to_js(lamb_trace(seed.into(), energy, t_final))
}
