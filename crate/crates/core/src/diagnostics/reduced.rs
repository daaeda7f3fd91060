//! Reduced trace dynamics `ẏ = F(y)/2` of the string with a point oscillator.
//!
//! Once the initial data no longer reach `x = 0`, the field is `y(t + x)` / `y(t − x)`
//! outside the origin and the jump condition `2ẏ = F(y)` closes the system.

use crate::error::{LabError, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::state::TraceSeries;

/// RK4 solution of `ẏ = F(y)/2` from `y(t0) = y0`, sampled at `times` (all ≥ `t0`).
pub fn reduced_trace(model: &ModelSpec, t0: f64, y0: f64, times: &[f64]) -> Result<Vec<f64>> {
    if model.kind != ModelKind::LambString {
        return Err(LabError::InvalidModel("the reduced trace equation is for LambString".into()));
    }
    let f = |y: f64| 0.5 * model.nonlinearity.force_real(y);
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut y) = (t0, y0);
    for &target in times {
        if target < t - 1e-12 {
            return Err(LabError::InvalidArgument("sample times must be non-decreasing and ≥ t0".into()));
        }
        let span = target - t;
        let steps = (span / 0.005).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = target;
        out.push(y);
    }
    Ok(out)
}

/// Sup-norm gap between the PDE trace and the reduced ODE restarted from the trace at `t_exit`.
pub fn reduced_oracle_gap(trace: &TraceSeries, model: &ModelSpec, t_exit: f64) -> Result<f64> {
    let start = trace
        .times
        .iter()
        .position(|&t| t >= t_exit - 1e-9)
        .ok_or_else(|| LabError::InvalidArgument(format!("trace ends before t = {t_exit}")))?;
    let times = &trace.times[start..];
    let ode = reduced_trace(model, times[0], trace.values[start].re, times)?;
    Ok(ode.iter().zip(&trace.values[start..]).map(|(a, b)| (a - b.re).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::NonlinearitySpec;

    #[test]
    fn logistic_closed_form() {
        // ẏ = (y − y³)/2 has y(t)² = 1/(1 + (1/y0² − 1)e^{−t}).
        let m = ModelSpec::lamb_string(NonlinearitySpec::bistable());
        let times: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let y = reduced_trace(&m, 0.0, 0.1, &times).unwrap();
        for (t, y) in times.iter().zip(y) {
            let exact = 1.0 / (1.0 + (1.0 / 0.01 - 1.0) * (-t).exp()).sqrt();
            assert!((y - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbed_points_flow_to_stable_states() {
        let m = ModelSpec::lamb_string(NonlinearitySpec::bistable());
        for (y0, target) in [(-0.01, -1.0), (0.01, 1.0), (1.5, 1.0), (-0.9, -1.0)] {
            let y = reduced_trace(&m, 0.0, y0, &[60.0]).unwrap()[0];
            assert!((y - target).abs() < 1e-9);
        }
    }
}
