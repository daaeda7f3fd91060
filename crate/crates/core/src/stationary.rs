//! Stationary orbits of the U(1) model, stationary states of the string and kinks of φ⁴.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::linalg::solve_tridiagonal;
use crate::models::{ModelKind, ModelSpec, NonlinearityMode};
use crate::poly::Polynomial;
use crate::state::{Field, SimState};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// `ψ(x, t) = ψ_ω(x) e^{−iωt}` with real positive profile `ψ_ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOrbit {
    pub omega: f64,
    /// Continuum trace value `C = ψ_ω(0)`.
    pub amplitude: f64,
    pub kappa: f64,
    pub grid: Grid1D,
    /// Newton-polished solution of the discrete stationary equation.
    pub profile: Vec<f64>,
}

impl StationaryOrbit {
    /// Initial data `e^{iθ}ψ_ω` with velocity `−iω e^{iθ}ψ_ω`.
    pub fn state(&self, theta: f64) -> SimState {
        let field = Field::from_real(self.profile.clone()).rotated(theta);
        let velocity = field.rotated(-std::f64::consts::FRAC_PI_2).scaled(self.omega);
        SimState { t: 0.0, grid: self.grid, field, velocity: Some(velocity) }
    }

    /// `C e^{−κ|x|}` on the orbit grid.
    pub fn continuum_profile(&self) -> Vec<f64> {
        self.grid.nodes().iter().map(|x| self.amplitude * (-self.kappa * x.abs()).exp()).collect()
    }

    /// `|2κC − a(C²)C|`.
    pub fn jump_residual(&self, model: &ModelSpec) -> f64 {
        let c = self.amplitude;
        (2.0 * self.kappa * c - model.nonlinearity.polynomial().eval(c * c) * c).abs()
    }

    /// Max-norm residual of `ψ″ − κ²ψ + δ a(|ψ|²)ψ = 0` on the grid, evaluated on the
    /// profile rotated by `θ`.
    pub fn discrete_residual(&self, model: &ModelSpec, theta: f64) -> f64 {
        let field = Field::from_real(self.profile.clone()).rotated(theta);
        let origin = self.grid.origin().expect("orbit grids contain the origin");
        let dx = self.grid.dx();
        let k2 = self.kappa * self.kappa;
        let mut worst = 0.0f64;
        for i in 1..self.grid.len() - 1 {
            let mut r = (field.get(i + 1) - 2.0 * field.get(i) + field.get(i - 1)) / (dx * dx) - k2 * field.get(i);
            if i == origin {
                r += model.nonlinearity.force(field.get(i)) / dx;
            }
            worst = worst.max(r.norm());
        }
        worst
    }
}

fn check_kgu1(model: &ModelSpec, omega: f64) -> Result<f64> {
    model.validate()?;
    if model.kind != ModelKind::KGU1 {
        return Err(LabError::InvalidModel(format!("stationary orbits need KGU1, got {:?}", model.kind)));
    }
    if !(omega.abs() < model.mass) {
        return Err(LabError::InvalidArgument(format!("|ω| = {} must be below m = {}", omega.abs(), model.mass)));
    }
    Ok((model.mass * model.mass - omega * omega).sqrt())
}

/// All orbits at `omega`, ordered by amplitude.
///
/// The zero orbit is returned alone when `a` is constant.
pub fn solve_stationary_orbits(model: &ModelSpec, omega: f64, grid: &Grid1D) -> Result<Vec<StationaryOrbit>> {
    let kappa = check_kgu1(model, omega)?;
    if grid.origin().is_none() {
        return Err(LabError::MissingOriginNode);
    }
    let a = model.nonlinearity.polynomial();
    if !model.nonlinearity.is_strictly_nonlinear() {
        return Ok(vec![StationaryOrbit { omega, amplitude: 0.0, kappa, grid: *grid, profile: vec![0.0; grid.len()] }]);
    }
    let mut amplitudes: Vec<f64> =
        a.shifted(2.0 * kappa).real_roots().into_iter().filter(|&s| s >= -1e-14).map(|s| s.max(0.0).sqrt()).collect();
    amplitudes.sort_by(f64::total_cmp);
    if amplitudes.is_empty() {
        return Err(LabError::NoOrbit(format!("a(s) = 2κ = {} has no nonnegative root at ω = {omega}", 2.0 * kappa)));
    }
    amplitudes
        .into_iter()
        .map(|c| {
            let profile = polish(&a, kappa, c, grid)?;
            Ok(StationaryOrbit { omega, amplitude: c, kappa, grid: *grid, profile })
        })
        .collect()
}

/// The orbit with the smallest nonnegative amplitude.
pub fn solve_stationary_orbit(model: &ModelSpec, omega: f64, grid: &Grid1D) -> Result<StationaryOrbit> {
    Ok(solve_stationary_orbits(model, omega, grid)?.remove(0))
}

/// Newton iteration on the discrete stationary system, seeded by `C e^{−κ|x|}`.
fn polish(a: &Polynomial, kappa: f64, c: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.len();
    let o = grid.origin().expect("checked by caller");
    let dx = grid.dx();
    let inv2 = 1.0 / (dx * dx);
    let k2 = kappa * kappa;
    let da = a.derivative();
    let mut psi: Vec<f64> = grid.nodes().iter().map(|x| c * (-kappa * x.abs()).exp()).collect();
    if c == 0.0 {
        return Ok(psi);
    }
    let m = n - 2;
    for _ in 0..NEWTON_MAX_ITER {
        let mut res = vec![0.0; m];
        let mut diag = vec![-2.0 * inv2 - k2; m];
        let off = vec![inv2; m];
        for i in 1..n - 1 {
            res[i - 1] = -((psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * inv2 - k2 * psi[i]);
        }
        let s = psi[o] * psi[o];
        res[o - 1] -= a.eval(s) * psi[o] / dx;
        diag[o - 1] += (a.eval(s) + 2.0 * s * da.eval(s)) / dx;
        solve_tridiagonal(&off, &diag, &off, &mut res)
            .ok_or_else(|| LabError::NoOrbit("singular Jacobian in Newton polish".into()))?;
        let mut step = 0.0f64;
        for i in 1..n - 1 {
            psi[i] += res[i - 1];
            step = step.max(res[i - 1].abs());
        }
        if step <= NEWTON_TOL * c.max(1.0) {
            return Ok(psi);
        }
    }
    Err(LabError::NoOrbit(format!("Newton polish did not converge in {NEWTON_MAX_ITER} iterations")))
}

/// `dC/dω` along a branch, from `a′(C²) d(C²) = 2 dκ`.
pub fn amplitude_slope(model: &ModelSpec, omega: f64, amplitude: f64) -> Result<f64> {
    let kappa = check_kgu1(model, omega)?;
    let da = model.nonlinearity.polynomial().derivative().eval(amplitude * amplitude);
    if da == 0.0 || amplitude == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ds = 2.0 * (-omega / kappa) / da;
    Ok(ds / (2.0 * amplitude))
}

/// Smallest-amplitude orbits at each frequency; frequencies without an orbit are skipped.
pub fn orbit_family(model: &ModelSpec, omegas: &[f64], grid: &Grid1D) -> Result<Vec<StationaryOrbit>> {
    let mut out = Vec::with_capacity(omegas.len());
    for &w in omegas {
        match solve_stationary_orbits(model, w, grid) {
            Ok(orbits) => out.extend(orbits),
            Err(LabError::NoOrbit(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Largest ratio `|ΔC| / (2|Δω| max|dC/dω|)` over successive samples of one branch.
///
/// Values ≤ 1 mean the sampled branch is continuous at the resolution of the sweep.
pub fn family_continuity(model: &ModelSpec, orbits: &[StationaryOrbit]) -> Result<f64> {
    let mut worst = 0.0f64;
    for pair in orbits.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        let slope = amplitude_slope(model, p.omega, p.amplitude)?
            .abs()
            .max(amplitude_slope(model, q.omega, q.amplitude)?.abs());
        let bound = 2.0 * (q.omega - p.omega).abs() * slope;
        let jump = (q.amplitude - p.amplitude).abs();
        if jump > 0.0 {
            worst = worst.max(jump / bound);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub value: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryStates {
    pub states: Vec<StationaryState>,
    /// `F ≡ 0`: every constant is stationary.
    pub degenerate: bool,
}

/// Constant stationary states `F(c) = 0` of the string, stable iff `F′(c) < 0`.
pub fn stationary_states(model: &ModelSpec) -> Result<StationaryStates> {
    model.validate()?;
    if model.kind != ModelKind::LambString || model.nonlinearity.mode != NonlinearityMode::RealScalar {
        return Err(LabError::InvalidModel("stationary states need LambString with a real polynomial F".into()));
    }
    let f = model.nonlinearity.polynomial();
    if f.is_zero() {
        return Ok(StationaryStates { states: Vec::new(), degenerate: true });
    }
    let df = f.derivative();
    let states = f.real_roots().into_iter().map(|c| StationaryState { value: c, stable: df.eval(c) < 0.0 }).collect();
    Ok(StationaryStates { states, degenerate: false })
}

/// Kink `tanh(γ(x − x₀ − vt)/√2)` of the φ⁴ model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    pub velocity: f64,
    pub center: f64,
    pub grid: Grid1D,
    /// Field at `t = 0`.
    pub profile: Vec<f64>,
    /// `∂_t φ` at `t = 0`.
    pub rate: Vec<f64>,
    /// Residual of `(1 − v²)φ″ = U′(φ)` with analytic derivatives.
    pub residual: f64,
}

impl SolitonProfile {
    pub fn gamma(&self) -> f64 {
        lorentz(self.velocity)
    }

    pub fn value_at(&self, x: f64, t: f64) -> f64 {
        kink_value(self.velocity, self.center, x, t)
    }

    pub fn state(&self) -> SimState {
        SimState {
            t: 0.0,
            grid: self.grid,
            field: Field::from_real(self.profile.clone()),
            velocity: Some(Field::from_real(self.rate.clone())),
        }
    }

    /// Max-norm residual of the comoving equation with centered differences; `O(dx²)`.
    pub fn finite_difference_residual(&self, model: &ModelSpec) -> f64 {
        let dx = self.grid.dx();
        let g2 = 1.0 - self.velocity * self.velocity;
        let p = &self.profile;
        (1..p.len() - 1)
            .map(|i| {
                let d2 = (p[i + 1] - 2.0 * p[i] + p[i - 1]) / (dx * dx);
                (g2 * d2 + model.nonlinearity.force_real(p[i])).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn lorentz(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

pub(crate) fn kink_value(v: f64, x0: f64, x: f64, t: f64) -> f64 {
    (lorentz(v) * (x - x0 - v * t) / std::f64::consts::SQRT_2).tanh()
}

pub(crate) fn kink_rate(v: f64, x0: f64, x: f64, t: f64) -> f64 {
    let g = lorentz(v);
    let s = 1.0 / (g * (x - x0 - v * t) / std::f64::consts::SQRT_2).cosh();
    -v * g / std::f64::consts::SQRT_2 * s * s
}

/// Boosted kink centred at `center` at `t = 0`.
pub fn kink_profile(model: &ModelSpec, velocity: f64, center: f64, grid: &Grid1D) -> Result<SolitonProfile> {
    model.validate()?;
    if model.kind != ModelKind::Phi4 {
        return Err(LabError::InvalidModel(format!("kinks need Phi4, got {:?}", model.kind)));
    }
    if !(velocity.abs() < 1.0) {
        return Err(LabError::InvalidArgument(format!("|v| = {} must be below 1", velocity.abs())));
    }
    let g = lorentz(velocity);
    let nodes = grid.nodes();
    let profile: Vec<f64> = nodes.iter().map(|&x| kink_value(velocity, center, x, 0.0)).collect();
    let rate = nodes.iter().map(|&x| kink_rate(velocity, center, x, 0.0)).collect();
    let residual = nodes
        .iter()
        .zip(&profile)
        .map(|(&x, &phi)| {
            let s = 1.0 / (g * (x - center) / std::f64::consts::SQRT_2).cosh();
            let d2 = -g * g * phi * s * s;
            ((1.0 - velocity * velocity) * d2 + model.nonlinearity.force_real(phi)).abs()
        })
        .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(LabError::InvalidModel(format!(
            "tanh kink does not solve this Phi4 nonlinearity (residual {residual:.2e})"
        )));
    }
    Ok(SolitonProfile { velocity, center, grid: *grid, profile, rate, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::NonlinearitySpec;

    fn kg(nl: NonlinearitySpec) -> ModelSpec {
        ModelSpec::kgu1(1.0, nl)
    }

    fn grid() -> Grid1D {
        Grid1D::symmetric(20.0, 0.05).unwrap()
    }

    #[test]
    fn closed_form_amplitude() {
        let o = solve_stationary_orbit(&kg(NonlinearitySpec::cubic_focusing()), 0.6, &grid()).unwrap();
        assert!((o.kappa - 0.8).abs() < 1e-15);
        assert!((o.amplitude - 1.6f64.sqrt()).abs() < 1e-10);
        assert!((o.amplitude - 1.264911).abs() < 1e-6);
        assert!(o.jump_residual(&kg(NonlinearitySpec::cubic_focusing())) < 1e-10);
        assert!(o.discrete_residual(&kg(NonlinearitySpec::cubic_focusing()), 0.0) < 1e-8);
    }

    #[test]
    fn near_threshold_orbit() {
        let o = solve_stationary_orbit(&kg(NonlinearitySpec::cubic_focusing()), 0.99, &grid()).unwrap();
        assert!((o.kappa - 0.14107).abs() < 1e-5);
        assert!((o.amplitude - 0.53117).abs() < 1e-5);
    }

    #[test]
    fn linear_model_has_only_zero_orbit() {
        for nl in [NonlinearitySpec::u1(vec![]), NonlinearitySpec::u1(vec![0.7])] {
            let orbits = solve_stationary_orbits(&kg(nl), 0.3, &grid()).unwrap();
            assert_eq!(orbits.len(), 1);
            assert_eq!(orbits[0].amplitude, 0.0);
            assert!(orbits[0].profile.iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn frequency_outside_gap() {
        let m = kg(NonlinearitySpec::cubic_focusing());
        assert!(solve_stationary_orbit(&m, 1.0, &grid()).is_err());
        assert!(solve_stationary_orbit(&m, -1.2, &grid()).is_err());
    }

    #[test]
    fn no_nonnegative_root() {
        let m = kg(NonlinearitySpec::u1(vec![-1.0, -1.0]));
        assert!(matches!(solve_stationary_orbit(&m, 0.5, &grid()), Err(LabError::NoOrbit(_))));
    }

    #[test]
    fn multiple_branches_sorted() {
        // a(s) = (s − 1)(s − 4) + 1.2 meets 2κ = 1.2 at s = 1 and s = 4.
        let m = kg(NonlinearitySpec::u1(vec![5.2, -5.0, 1.0]));
        let orbits = solve_stationary_orbits(&m, 0.8, &grid()).unwrap();
        assert_eq!(orbits.len(), 2);
        assert!((orbits[0].amplitude - 1.0).abs() < 1e-10 && (orbits[1].amplitude - 2.0).abs() < 1e-10);
    }

    #[test]
    fn polished_profile_is_close_to_continuum() {
        let o = solve_stationary_orbit(&kg(NonlinearitySpec::confining()), 0.5, &grid()).unwrap();
        let diff = o.profile.iter().zip(o.continuum_profile()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-3 && diff > 0.0);
    }

    #[test]
    fn phase_rotated_orbit_still_solves() {
        let m = kg(NonlinearitySpec::cubic_focusing());
        let o = solve_stationary_orbit(&m, 0.6, &grid()).unwrap();
        let r0 = o.discrete_residual(&m, 0.0);
        for theta in [0.4, 2.0, 5.5] {
            assert!((o.discrete_residual(&m, theta) - r0).abs() < 1e-9);
        }
    }

    #[test]
    fn family_is_continuous() {
        let m = kg(NonlinearitySpec::cubic_focusing());
        let omegas: Vec<f64> = (0..50).map(|k| 0.02 + 0.0195 * k as f64).collect();
        let fam = orbit_family(&m, &omegas, &grid()).unwrap();
        assert_eq!(fam.len(), 50);
        assert!(family_continuity(&m, &fam).unwrap() <= 1.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let m = kg(NonlinearitySpec::confining());
        let c = |w: f64| solve_stationary_orbit(&m, w, &grid()).unwrap().amplitude;
        let h = 1e-5;
        let fd = (c(0.4 + h) - c(0.4 - h)) / (2.0 * h);
        assert!((amplitude_slope(&m, 0.4, c(0.4)).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn bistable_states() {
        let s = stationary_states(&ModelSpec::lamb_string(NonlinearitySpec::bistable())).unwrap();
        let got: Vec<(f64, bool)> = s.states.iter().map(|s| (s.value, s.stable)).collect();
        assert_eq!(got.len(), 3);
        for ((v, st), (ev, est)) in got.iter().zip([(-1.0, true), (0.0, false), (1.0, true)]) {
            assert!((v - ev).abs() < 1e-12);
            assert_eq!(*st, est);
        }
    }

    #[test]
    fn degenerate_and_linear_states() {
        let s = stationary_states(&ModelSpec::lamb_string(NonlinearitySpec::real(vec![]))).unwrap();
        assert!(s.degenerate && s.states.is_empty());
        let s = stationary_states(&ModelSpec::lamb_string(NonlinearitySpec::real(vec![0.0, -1.0]))).unwrap();
        assert_eq!(s.states, vec![StationaryState { value: 0.0, stable: true }]);
        assert!(stationary_states(&ModelSpec::phi4()).is_err());
    }

    #[test]
    fn static_and_boosted_kinks() {
        let g = Grid1D::symmetric(20.0, 0.01).unwrap();
        let k0 = kink_profile(&ModelSpec::phi4(), 0.0, 0.0, &g).unwrap();
        assert!(k0.residual <= 1e-8);
        let i = g.node_index(1.0).unwrap();
        assert!((k0.profile[i] - (1.0 / 2f64.sqrt()).tanh()).abs() < 1e-15);
        let k3 = kink_profile(&ModelSpec::phi4(), 0.3, 0.0, &g).unwrap();
        assert!((k3.gamma() - 1.0 / 0.91f64.sqrt()).abs() < 1e-15);
        assert!((k3.profile[i] - (k3.gamma() / 2f64.sqrt()).tanh()).abs() < 1e-15);
        assert!(kink_profile(&ModelSpec::phi4(), 1.0, 0.0, &g).is_err());
    }

    #[test]
    fn finite_difference_residual_is_second_order() {
        let r = |dx: f64| {
            let g = Grid1D::symmetric(20.0, dx).unwrap();
            kink_profile(&ModelSpec::phi4(), 0.3, 0.0, &g).unwrap().finite_difference_residual(&ModelSpec::phi4())
        };
        let ratio = r(0.02) / r(0.01);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }
}
