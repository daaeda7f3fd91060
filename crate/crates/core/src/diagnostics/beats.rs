//! Bound states of the discrete Schrödinger operator and the current beat spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::spectrum::{real_peaks, trailing_spectrum};
use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::integrate::{evolve_observed, KineticSolver, StepPlan};
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::models::{ModelKind, ModelSpec};
use crate::state::{Field, SimState, TraceSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub energy: f64,
    /// Real eigenfunction with `Σ dx |ψ|² = 1`, zero at the ends.
    pub profile: Vec<f64>,
}

impl BoundState {
    pub fn field(&self) -> Field {
        Field::from_real(self.profile.clone())
    }
}

/// Eigenpairs of the interior (Dirichlet) Hamiltonian with `E < min(V(x_min), V(x_max))`.
pub fn bound_states(model: &ModelSpec, grid: &Grid1D) -> Result<Vec<BoundState>> {
    model.validate()?;
    if model.kind != ModelKind::LinearSchrodinger {
        return Err(LabError::InvalidModel(format!("bound states need LinearSchrodinger, got {:?}", model.kind)));
    }
    let v = model.potential.as_deref().expect("validated");
    if v.len() != grid.len() {
        return Err(LabError::GridMismatch { expected: grid.len(), found: v.len() });
    }
    let c = &model.constants;
    let n = grid.len();
    let dx = grid.dx();
    let t = c.hbar * c.hbar / (2.0 * c.mass * dx * dx);
    let diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * t + v[i]).collect();
    let off = vec![-t; n - 3];
    let threshold = v[0].min(v[n - 1]);
    let scale = 1.0 / dx.sqrt();
    Ok(symmetric_tridiagonal_eigen(&diag, &off)
        .into_iter()
        .take_while(|(e, _)| *e < threshold)
        .map(|(energy, vec)| {
            let sign = if vec.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            let mut profile = vec![0.0; n];
            for (p, x) in profile[1..n - 1].iter_mut().zip(&vec) {
                *p = sign * scale * x;
            }
            BoundState { energy, profile }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatSpectrum {
    /// `(ω, amplitude)` of the current spectrum peaks, strongest first.
    pub peaks: Vec<(f64, f64)>,
    /// Oracle bound-state energies, ascending.
    pub energies: Vec<f64>,
    /// `j(x*, t)` at every step.
    pub current: TraceSeries,
    pub resolution: f64,
    pub warnings: Vec<String>,
}

impl BeatSpectrum {
    /// Strongest peak amplitude, or 0 when there is none.
    pub fn max_amplitude(&self) -> f64 {
        self.peaks.first().map_or(0.0, |p| p.1)
    }
}

/// `j = (ħ/m) Im(ψ̄ ψ′)` at node `i` with centered `ψ′`.
pub fn probability_current(state: &SimState, i: usize, hbar: f64, mass: f64) -> f64 {
    let d = (state.field.get(i + 1) - state.field.get(i - 1)) / (2.0 * state.grid.dx());
    hbar / mass * (state.field.get(i).conj() * d).im
}

/// Evolves `psi0` over `[0, horizon]` and analyses the current at `probe`.
pub fn beat_spectrum(model: &ModelSpec, psi0: &SimState, horizon: f64, probe: f64, dt: f64) -> Result<BeatSpectrum> {
    let states = bound_states(model, &psi0.grid)?;
    if states.len() < 2 {
        return Err(LabError::TooFewBoundStates { found: states.len() });
    }
    let i =
        psi0.grid.node_index(probe).ok_or_else(|| LabError::InvalidArgument(format!("probe {probe} is not a node")))?;
    if i == 0 || i + 1 >= psi0.grid.len() {
        return Err(LabError::InvalidArgument("probe must be an interior node".into()));
    }
    let c = model.constants;
    let plan = StepPlan::strang(dt, psi0.t + horizon, 1, KineticSolver::CrankNicolson);
    let mut current = TraceSeries::with_capacity((horizon / dt) as usize + 1);
    let evo = evolve_observed(psi0, model, &plan, |s| {
        current.push(s.t, Complex64::new(probability_current(s, i, c.hbar, c.mass), 0.0));
        Ok(())
    })?;
    let spec = trailing_spectrum(&current, current.span(), true)?;
    Ok(BeatSpectrum {
        peaks: real_peaks(&spec),
        energies: states.iter().map(|s| s.energy).collect(),
        current,
        resolution: spec.resolution,
        warnings: evo.warnings,
    })
}
