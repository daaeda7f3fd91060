//! Time stepping: leapfrog for the wave-type models, Strang splitting for Schrödinger.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::energy::window_nodes;
use crate::error::{LabError, Result};
use crate::linalg::TridiagonalFactor;
use crate::models::{Dynamics, ModelKind, ModelSpec};
use crate::state::{Field, SimState, TraceSeries};

/// Largest `dt/dx` accepted by the leapfrog scheme.
pub const CFL_LIMIT: f64 = 0.9;
/// Boundary density above which the Schrödinger solver reports a warning.
pub const BOUNDARY_DENSITY_WARN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Leapfrog,
    StrangSplit,
}

/// Kinetic sub-step of the split Schrödinger scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KineticSolver {
    /// Unitary tridiagonal solve, Dirichlet ends.
    #[default]
    CrankNicolson,
    /// Exact free propagator on the periodic grid via FFT.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepPlan {
    pub dt: f64,
    /// Absolute end time.
    pub t_final: f64,
    pub scheme: Scheme,
    /// Observation radius `R`; also where the boundary flux is recorded.
    #[serde(default)]
    pub observe_radius: f64,
    /// Steps between snapshots; 0 disables them.
    #[serde(default)]
    pub flush_stride: usize,
    #[serde(default)]
    pub kinetic: KineticSolver,
    /// Extra distance required beyond `R + t` for wave-type models.
    #[serde(default = "default_margin")]
    pub light_cone_margin: f64,
    /// Optional bound on `dt·(max|V| + ħπ²/(2m dx²))/ħ` for the split scheme.
    #[serde(default)]
    pub max_phase_per_step: Option<f64>,
}

fn default_margin() -> f64 {
    1.0
}

impl StepPlan {
    pub fn leapfrog(dt: f64, t_final: f64, observe_radius: f64, flush_stride: usize) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::Leapfrog,
            observe_radius,
            flush_stride,
            kinetic: KineticSolver::CrankNicolson,
            light_cone_margin: default_margin(),
            max_phase_per_step: None,
        }
    }

    pub fn strang(dt: f64, t_final: f64, flush_stride: usize, kinetic: KineticSolver) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::StrangSplit,
            observe_radius: 0.0,
            flush_stride,
            kinetic,
            light_cone_margin: default_margin(),
            max_phase_per_step: None,
        }
    }

    fn steps_from(&self, t0: f64) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        let span = self.t_final - t0;
        if !(span >= 0.0 && span.is_finite()) {
            return Err(LabError::InvalidArgument(format!("t_final {} precedes t = {t0}", self.t_final)));
        }
        let n = (span / self.dt).round();
        if (n * self.dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(LabError::InvalidArgument(format!(
                "t_final − t0 = {span} is not a multiple of dt = {}",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Cumulative energy outflow through `x = ±R`, positive outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxLedger {
    pub radius: f64,
    pub times: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub total: Vec<f64>,
}

impl FluxLedger {
    fn new(radius: f64) -> Self {
        Self { radius, times: Vec::new(), plus: Vec::new(), minus: Vec::new(), total: Vec::new() }
    }

    /// Trapezoid accumulation of the instantaneous outflows.
    fn push(&mut self, t: f64, rate: (f64, f64), prev_rate: Option<(f64, f64)>) {
        let (p, m) = match (self.times.last(), prev_rate) {
            (Some(&t0), Some(r0)) => {
                let h = 0.5 * (t - t0);
                (self.plus.last().unwrap() + h * (r0.0 + rate.0), self.minus.last().unwrap() + h * (r0.1 + rate.1))
            }
            _ => (0.0, 0.0),
        };
        self.times.push(t);
        self.plus.push(p);
        self.minus.push(m);
        self.total.push(p + m);
    }

    pub fn final_total(&self) -> f64 {
        self.total.last().copied().unwrap_or(0.0)
    }
}

/// Result of a run.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: SimState,
    /// `ψ(0, t)` at every step (nearest node to 0 when the origin is not a node).
    pub trace: TraceSeries,
    pub snapshots: Vec<SimState>,
    /// Flux through `±observe_radius`, every step, when those are nodes.
    pub flux: Option<FluxLedger>,
    pub warnings: Vec<String>,
}

/// Integrates `state` to `plan.t_final`, keeping every `flush_stride`-th state.
pub fn evolve(state: &SimState, model: &ModelSpec, plan: &StepPlan) -> Result<Evolution> {
    let mut snapshots = Vec::new();
    let mut evo = evolve_observed(state, model, plan, |s| {
        snapshots.push(s.clone());
        Ok(())
    })?;
    evo.snapshots = snapshots;
    Ok(evo)
}

/// Like [`evolve`] but hands each snapshot to `observer` instead of storing it.
pub fn evolve_observed(
    state: &SimState,
    model: &ModelSpec,
    plan: &StepPlan,
    mut observer: impl FnMut(&SimState) -> Result<()>,
) -> Result<Evolution> {
    model.check_state(state)?;
    if !state.field.is_finite() || !state.velocity.as_ref().is_none_or(Field::is_finite) {
        return Err(LabError::BlowUp { t: state.t });
    }
    let expected = if model.kind.is_wave() { Scheme::Leapfrog } else { Scheme::StrangSplit };
    if plan.scheme != expected {
        return Err(LabError::InvalidArgument(format!("{:?} requires the {expected:?} scheme", model.kind)));
    }
    let steps = plan.steps_from(state.t)?;
    match plan.scheme {
        Scheme::Leapfrog => leapfrog(state, model, plan, steps, &mut observer),
        Scheme::StrangSplit => strang(state, model, plan, steps, &mut observer),
    }
}

fn trace_node(state: &SimState) -> usize {
    state.grid.origin().unwrap_or_else(|| state.grid.nearest(0.0))
}

/// Instantaneous outflow `(at +R, at −R)` with centered `ψ′`.
fn flux_rates(field: &Field, velocity: &Field, lo: usize, hi: usize, dx: f64) -> (f64, f64) {
    let rate = |i: usize| {
        let d = (field.get(i + 1) - field.get(i - 1)) / (2.0 * dx);
        (velocity.get(i).conj() * d).re
    };
    (-rate(hi), rate(lo))
}

fn leapfrog(
    initial: &SimState,
    model: &ModelSpec,
    plan: &StepPlan,
    steps: usize,
    observer: &mut impl FnMut(&SimState) -> Result<()>,
) -> Result<Evolution> {
    let grid = initial.grid;
    let dx = grid.dx();
    let dt = plan.dt;
    if dt > CFL_LIMIT * dx * (1.0 + 1e-12) {
        return Err(LabError::Cfl { dt, limit: CFL_LIMIT * dx });
    }
    let duration = plan.t_final - initial.t;
    let required = plan.observe_radius + duration + plan.light_cone_margin;
    let available = (-grid.x_min()).min(grid.x_max());
    if available < required {
        return Err(LabError::DomainTooSmall { required, available });
    }

    let dynamics = Dynamics::new(model, &grid)?;
    let n = grid.len();
    let mut psi = initial.field.clone();
    let mut vel = initial.velocity.clone().expect("checked");
    for end in [0, n - 1] {
        vel.re[end] = 0.0;
        vel.im[end] = 0.0;
    }
    let mut acc = Field::zeros(n);
    dynamics.acceleration(&psi, &mut acc);

    let probe = trace_node(initial);
    let mut trace = TraceSeries::with_capacity(steps + 1);
    trace.push(initial.t, psi.get(probe));

    let flux_window = if plan.observe_radius > 0.0 {
        window_nodes(initial, plan.observe_radius).ok().filter(|&(lo, hi)| lo > 0 && hi + 1 < n)
    } else {
        None
    };
    let mut flux = flux_window.map(|_| FluxLedger::new(plan.observe_radius));
    let mut prev_rate = None;
    if let (Some(ledger), Some((lo, hi))) = (flux.as_mut(), flux_window) {
        let r = flux_rates(&psi, &vel, lo, hi, dx);
        ledger.push(initial.t, r, None);
        prev_rate = Some(r);
    }

    let snapshot =
        |psi: &Field, vel: &Field, t: f64| SimState { t, grid, field: psi.clone(), velocity: Some(vel.clone()) };
    if plan.flush_stride > 0 {
        observer(&snapshot(&psi, &vel, initial.t))?;
    }

    let half = 0.5 * dt;
    for k in 1..=steps {
        for i in 1..n - 1 {
            vel.re[i] += half * acc.re[i];
            vel.im[i] += half * acc.im[i];
            psi.re[i] += dt * vel.re[i];
            psi.im[i] += dt * vel.im[i];
        }
        dynamics.acceleration(&psi, &mut acc);
        for i in 1..n - 1 {
            vel.re[i] += half * acc.re[i];
            vel.im[i] += half * acc.im[i];
        }
        let t = initial.t + k as f64 * dt;
        let y = psi.get(probe);
        if !y.re.is_finite() || !y.im.is_finite() || (k % 64 == 0 && !psi.is_finite()) {
            return Err(LabError::BlowUp { t });
        }
        trace.push(t, y);
        if let (Some(ledger), Some((lo, hi))) = (flux.as_mut(), flux_window) {
            let r = flux_rates(&psi, &vel, lo, hi, dx);
            ledger.push(t, r, prev_rate);
            prev_rate = Some(r);
        }
        if plan.flush_stride > 0 && k % plan.flush_stride == 0 {
            observer(&snapshot(&psi, &vel, t))?;
        }
    }
    if !psi.is_finite() || !vel.is_finite() {
        return Err(LabError::BlowUp { t: plan.t_final });
    }
    if model.kind == ModelKind::LambString || model.kind == ModelKind::Phi4 {
        psi.im.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(Evolution {
        final_state: SimState { t: initial.t + steps as f64 * dt, grid, field: psi, velocity: Some(vel) },
        trace,
        snapshots: Vec::new(),
        flux,
        warnings: Vec::new(),
    })
}

enum Kinetic {
    Cn { factor: TridiagonalFactor, r: Complex64 },
    Fft { forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>>, phases: Vec<Complex64> },
}

impl Kinetic {
    fn apply(&self, psi: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = psi.len();
        match self {
            Kinetic::Cn { factor, r } => {
                // (1 + 2r) ψ_i − r(ψ_{i−1} + ψ_{i+1}) = (1 − 2r) ψ_i + r(ψ_{i−1} + ψ_{i+1})
                scratch.clear();
                scratch.extend((1..n - 1).map(|i| (1.0 - 2.0 * r) * psi[i] + r * (psi[i - 1] + psi[i + 1])));
                factor.solve(scratch);
                psi[1..n - 1].copy_from_slice(scratch);
                psi[0] = Complex64::default();
                psi[n - 1] = Complex64::default();
            }
            Kinetic::Fft { forward, inverse, phases } => {
                forward.process(psi);
                for (z, p) in psi.iter_mut().zip(phases) {
                    *z *= p;
                }
                inverse.process(psi);
                let scale = 1.0 / n as f64;
                psi.iter_mut().for_each(|z| *z *= scale);
            }
        }
    }
}

fn strang(
    initial: &SimState,
    model: &ModelSpec,
    plan: &StepPlan,
    steps: usize,
    observer: &mut impl FnMut(&SimState) -> Result<()>,
) -> Result<Evolution> {
    let grid = initial.grid;
    let n = grid.len();
    let dx = grid.dx();
    let dt = plan.dt;
    let c = model.constants;
    let v = model.potential.as_deref().expect("validated");
    if let Some(limit) = plan.max_phase_per_step {
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let phase = dt * (vmax + c.hbar * c.hbar * std::f64::consts::PI.powi(2) / (2.0 * c.mass * dx * dx)) / c.hbar;
        if phase > limit {
            return Err(LabError::Cfl { dt, limit: dt * limit / phase });
        }
    }

    let kinetic = match plan.kinetic {
        KineticSolver::CrankNicolson => {
            let r = Complex64::new(0.0, dt * c.hbar / (4.0 * c.mass * dx * dx));
            let m = n - 2;
            let diag = vec![1.0 + 2.0 * r; m];
            let off = vec![-r; m];
            let factor = TridiagonalFactor::new(&off, &diag, &off)
                .ok_or_else(|| LabError::InvalidArgument("singular Crank–Nicolson matrix".into()))?;
            Kinetic::Cn { factor, r }
        }
        KineticSolver::Spectral => {
            let mut planner = FftPlanner::new();
            let period = n as f64 * dx;
            let phases = (0..n)
                .map(|j| {
                    let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                    let k = 2.0 * std::f64::consts::PI * m / period;
                    Complex64::from_polar(1.0, -c.hbar * k * k * dt / (2.0 * c.mass))
                })
                .collect();
            Kinetic::Fft { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), phases }
        }
    };
    let half_phase: Vec<Complex64> =
        v.iter().map(|&vi| Complex64::from_polar(1.0, -vi * dt / (2.0 * c.hbar))).collect();

    let mut psi: Vec<Complex64> = initial.field.iter().collect();
    if plan.kinetic == KineticSolver::CrankNicolson {
        psi[0] = Complex64::default();
        psi[n - 1] = Complex64::default();
    }
    let probe = trace_node(initial);
    let mut trace = TraceSeries::with_capacity(steps + 1);
    trace.push(initial.t, psi[probe]);
    let mut warnings = Vec::new();
    let snapshot = |psi: &[Complex64], t: f64| SimState {
        t,
        grid,
        field: Field::from_iter_complex(psi.iter().copied()),
        velocity: None,
    };
    if plan.flush_stride > 0 {
        observer(&snapshot(&psi, initial.t))?;
    }
    let edge = n.min(3);
    let mut scratch = Vec::with_capacity(n);
    let mut warned = false;
    for k in 1..=steps {
        for (z, p) in psi.iter_mut().zip(&half_phase) {
            *z *= p;
        }
        kinetic.apply(&mut psi, &mut scratch);
        for (z, p) in psi.iter_mut().zip(&half_phase) {
            *z *= p;
        }
        let t = initial.t + k as f64 * dt;
        if !psi[probe].re.is_finite() || !psi[probe].im.is_finite() {
            return Err(LabError::BlowUp { t });
        }
        trace.push(t, psi[probe]);
        if !warned {
            let boundary = psi[..edge].iter().chain(&psi[n - edge..]).map(|z| z.norm_sqr()).fold(0.0, f64::max);
            if boundary > BOUNDARY_DENSITY_WARN {
                warnings.push(format!("boundary density {boundary:.3e} exceeds {BOUNDARY_DENSITY_WARN:e} at t = {t}"));
                warned = true;
            }
        }
        if plan.flush_stride > 0 && k % plan.flush_stride == 0 {
            observer(&snapshot(&psi, t))?;
        }
    }
    let final_state = snapshot(&psi, initial.t + steps as f64 * dt);
    if !final_state.field.is_finite() {
        return Err(LabError::BlowUp { t: final_state.t });
    }
    Ok(Evolution { final_state, trace, snapshots: Vec::new(), flux: None, warnings })
}

/// Cumulative energy outflow through `±radius`, trapezoid in time over `snapshots`.
pub fn boundary_flux(snapshots: &[SimState], radius: f64) -> Result<FluxLedger> {
    let first = snapshots.first().ok_or(LabError::TooFewSamples { found: 0, required: 2 })?;
    if snapshots.len() < 2 {
        return Err(LabError::TooFewSamples { found: 1, required: 2 });
    }
    let (lo, hi) = window_nodes(first, radius)?;
    let n = first.grid.len();
    if lo == 0 || hi + 1 >= n {
        return Err(LabError::InvalidArgument(format!("radius {radius} touches the grid boundary")));
    }
    let h = snapshots[1].t - snapshots[0].t;
    let mut ledger = FluxLedger::new(radius);
    let mut prev = None;
    for (k, s) in snapshots.iter().enumerate() {
        if s.grid != first.grid {
            return Err(LabError::GridMismatch { expected: n, found: s.grid.len() });
        }
        if k > 0 && ((s.t - snapshots[k - 1].t) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(LabError::InvalidArgument("snapshots are not uniformly spaced".into()));
        }
        let vel = s.velocity.as_ref().ok_or_else(|| LabError::InvalidArgument("flux needs velocity fields".into()))?;
        let r = flux_rates(&s.field, vel, lo, hi, s.grid.dx());
        ledger.push(s.t, r, prev);
        prev = Some(r);
    }
    Ok(ledger)
}
