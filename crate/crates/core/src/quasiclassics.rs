//! Classical rays through an electron gun, with action accumulation and the
//! de Broglie relations read off at the anode.
//!
//! The cathode is the plane `x3 = 0` and the anode the plane `x3 = D`. Beyond the
//! anode the potential is constant, so rays that get there move freely.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysConstants;
use crate::error::{LabError, Result};

pub type Vec3 = [f64; 3];

/// Trilinear table on a box; constant beyond the anode plane by construction of
/// the data, not enforced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
    /// Row-major with `x3` fastest.
    pub values: Vec<f64>,
}

impl PotentialTable {
    pub fn sample(origin: Vec3, spacing: Vec3, dims: [usize; 3], f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let x = [
                        origin[0] + i as f64 * spacing[0],
                        origin[1] + j as f64 * spacing[1],
                        origin[2] + k as f64 * spacing[2],
                    ];
                    values.push(f(x));
                }
            }
        }
        let t = Self { origin, spacing, dims, values };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&n| n < 2) {
            return Err(LabError::InvalidArgument("potential table needs at least 2 nodes per axis".into()));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(LabError::InvalidArgument("potential table spacing must be positive".into()));
        }
        if self.values.len() != self.dims.iter().product::<usize>() {
            return Err(LabError::GridMismatch { expected: self.dims.iter().product(), found: self.values.len() });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument("potential table has non-finite values".into()));
        }
        Ok(())
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    /// Cell index and local coordinates, or `None` outside the box. On a node plane
    /// of `x3`, `lower` selects the cell below it.
    fn locate(&self, x: Vec3, lower: bool) -> Option<([usize; 3], Vec3)> {
        let mut idx = [0; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let u = (x[a] - self.origin[a]) / self.spacing[a];
            let last = (self.dims[a] - 1) as f64;
            if !(u >= -1e-12 && u <= last + 1e-12) {
                return None;
            }
            let mut cell = u.floor().clamp(0.0, last - 1.0);
            if a == 2 && lower && cell > 0.0 && (u - u.round()).abs() < 1e-9 && u.round() == cell {
                cell -= 1.0;
            }
            idx[a] = cell as usize;
            frac[a] = (u - cell).clamp(0.0, 1.0);
        }
        Some((idx, frac))
    }

    fn value_and_gradient(&self, x: Vec3, lower: bool) -> Option<(f64, Vec3)> {
        let ([i, j, k], [u, v, w]) = self.locate(x, lower)?;
        let c = |a, b, d| self.at(i + a, j + b, k + d);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let c00 = lerp(c(0, 0, 0), c(1, 0, 0), u);
        let c01 = lerp(c(0, 0, 1), c(1, 0, 1), u);
        let c10 = lerp(c(0, 1, 0), c(1, 1, 0), u);
        let c11 = lerp(c(0, 1, 1), c(1, 1, 1), u);
        let c0 = lerp(c00, c10, v);
        let c1 = lerp(c01, c11, v);
        let value = lerp(c0, c1, w);
        let dw = (c1 - c0) / self.spacing[2];
        let dv = (lerp(c10, c11, w) - lerp(c00, c01, w)) / self.spacing[1];
        let du = {
            let face = |a: usize| lerp(lerp(c(a, 0, 0), c(a, 1, 0), v), lerp(c(a, 0, 1), c(a, 1, 1), v), w);
            (face(1) - face(0)) / self.spacing[0]
        };
        Some((value, [du, dv, dw]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GunPotential {
    /// `Φ* x3 / D` between the plates.
    LinearRamp {
        phi_star: f64,
    },
    /// `Φ* g(x3/D)` with `g(u) = u + Σ_j b_j sin(jπu)/(jπ)`; monotone when `Σ|b_j| < 1`.
    SmoothRamp {
        phi_star: f64,
        coefficients: Vec<f64>,
    },
    /// Constant everywhere.
    Uniform {
        value: f64,
    },
    Table(PotentialTable),
}

/// Which side of the anode a force evaluation belongs to. At the anode plane the
/// field of a ramp is discontinuous, so the caller picks the one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Gap,
    Beyond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GunConfig {
    pub potential: GunPotential,
    /// Anode distance `D`.
    pub anode: f64,
    /// Aperture point `x*` on the anode.
    pub aperture: Vec3,
    /// Emission momentum magnitude `ε`; also sets the tolerance `ε²` on `H(x0, p0)`.
    #[serde(default)]
    pub emission_spread: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub constants: PhysConstants,
}

fn default_dt() -> f64 {
    1e-3
}

/// Absolute slack on the emission condition when `ε = 0`.
const EMISSION_SLACK: f64 = 1e-12;

impl GunConfig {
    pub fn linear_ramp(phi_star: f64, anode: f64) -> Self {
        Self {
            potential: GunPotential::LinearRamp { phi_star },
            anode,
            aperture: [0.0, 0.0, anode],
            emission_spread: 0.0,
            dt: default_dt(),
            constants: PhysConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if !(self.anode > 0.0 && self.anode.is_finite()) {
            return Err(LabError::InvalidArgument(format!("anode distance must be positive, got {}", self.anode)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.emission_spread >= 0.0 && self.emission_spread.is_finite()) {
            return Err(LabError::InvalidArgument("emission_spread must be non-negative".into()));
        }
        if (self.aperture[2] - self.anode).abs() > 1e-12 * self.anode {
            return Err(LabError::InvalidArgument("aperture point must lie on the anode plane".into()));
        }
        match &self.potential {
            GunPotential::Table(t) => t.validate(),
            GunPotential::SmoothRamp { coefficients, .. } if coefficients.iter().any(|b| !b.is_finite()) => {
                Err(LabError::InvalidArgument("ramp coefficients must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Potential at the aperture, i.e. `Φ*`.
    pub fn phi_star(&self) -> Result<f64> {
        Ok(self.potential_at(self.aperture, Side::Beyond)?.0)
    }

    /// Default emission point below the aperture, with momentum `ε e3`.
    pub fn emission_start(&self) -> RayStart {
        RayStart {
            position: [self.aperture[0], self.aperture[1], 0.0],
            momentum: [0.0, 0.0, self.emission_spread],
            time: 0.0,
        }
    }

    fn side(&self, x3: f64) -> Side {
        if x3 < self.anode {
            Side::Gap
        } else {
            Side::Beyond
        }
    }

    fn potential_at(&self, x: Vec3, side: Side) -> Result<(f64, Vec3)> {
        let d = self.anode;
        let ramp = |phi_star: f64, g: &dyn Fn(f64) -> (f64, f64)| match side {
            Side::Beyond => (phi_star, [0.0; 3]),
            Side::Gap => {
                let (gv, gp) = g(x[2] / d);
                (phi_star * gv, [0.0, 0.0, phi_star * gp / d])
            }
        };
        let out = match &self.potential {
            GunPotential::LinearRamp { phi_star } => ramp(*phi_star, &|u| (u, 1.0)),
            GunPotential::SmoothRamp { phi_star, coefficients } => ramp(*phi_star, &|u| {
                let mut g = u;
                let mut gp = 1.0;
                for (j, b) in coefficients.iter().enumerate() {
                    let w = (j + 1) as f64 * std::f64::consts::PI;
                    g += b * (w * u).sin() / w;
                    gp += b * (w * u).cos();
                }
                (g, gp)
            }),
            GunPotential::Uniform { value } => (*value, [0.0; 3]),
            GunPotential::Table(t) => {
                t.value_and_gradient(x, side == Side::Gap).ok_or(LabError::DomainExit { t: f64::NAN, x3: x[2] })?
            }
        };
        Ok(out)
    }

    fn in_domain(&self, x: Vec3) -> bool {
        match &self.potential {
            GunPotential::Table(t) => t.locate(x, false).is_some(),
            _ => x[2] >= -1e-12,
        }
    }

    /// `H = p²/2m + eΦ`.
    pub fn hamiltonian(&self, x: Vec3, p: Vec3) -> Result<f64> {
        let (phi, _) = self.potential_at(x, self.side(x[2]))?;
        Ok(dot(p, p) / (2.0 * self.constants.mass) + self.constants.charge * phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayStart {
    pub position: Vec3,
    pub momentum: Vec3,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec3>,
    pub momenta: Vec<Vec3>,
    /// `S(t)`, starting from `p0·x0 − H0 t0`.
    pub action: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    /// Time of the anode crossing, if any.
    pub anode_time: Option<f64>,
    pub anode: f64,
    /// Potential at the terminal point.
    pub terminal_potential: f64,
}

impl Trajectory {
    pub fn final_position(&self) -> Vec3 {
        *self.positions.last().expect("nonempty")
    }

    pub fn final_momentum(&self) -> Vec3 {
        *self.momenta.last().expect("nonempty")
    }

    pub fn final_action(&self) -> f64 {
        *self.action.last().expect("nonempty")
    }

    /// `S(t_end) − S(t_start)`.
    pub fn action_increment(&self) -> f64 {
        self.final_action() - self.action[0]
    }

    /// Largest `|H(t) − H(t0)|`.
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        self.hamiltonian.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max)
    }

    pub fn in_field_free_region(&self) -> bool {
        self.final_position()[2] >= self.anode
    }
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy(a: f64, x: Vec3, y: Vec3) -> Vec3 {
    [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]]
}

/// Störmer–Verlet from `start` to `t_final`; a step that crosses the anode is split
/// at the crossing so that each piece sees a smooth force.
pub fn trace_ray(config: &GunConfig, start: RayStart, t_final: f64) -> Result<Trajectory> {
    config.validate()?;
    let c = config.constants;
    let (m, e) = (c.mass, c.charge);
    if !(t_final > start.time) {
        return Err(LabError::InvalidArgument(format!("t_final {t_final} must exceed t0 {}", start.time)));
    }
    if !config.in_domain(start.position) {
        return Err(LabError::DomainExit { t: start.time, x3: start.position[2] });
    }
    let h0 = config.hamiltonian(start.position, start.momentum)?;
    let tolerance = config.emission_spread.powi(2) + EMISSION_SLACK;
    if h0.abs() > tolerance {
        return Err(LabError::EmissionEnergy { h: h0, tolerance });
    }
    let force = |x: Vec3, side: Side| -> Result<Vec3> {
        let (_, g) = config.potential_at(x, side)?;
        Ok([-e * g[0], -e * g[1], -e * g[2]])
    };
    let lagrangian = |x: Vec3, p: Vec3, side: Side| -> Result<f64> {
        let (phi, _) = config.potential_at(x, side)?;
        Ok(dot(p, p) / (2.0 * m) - e * phi)
    };

    let mut x = start.position;
    let mut p = start.momentum;
    let mut t = start.time;
    let mut s = dot(p, x) - h0 * t;
    let mut side = config.side(x[2]);
    let mut traj = Trajectory {
        times: vec![t],
        positions: vec![x],
        momenta: vec![p],
        action: vec![s],
        hamiltonian: vec![h0],
        anode_time: None,
        anode: config.anode,
        terminal_potential: 0.0,
    };
    let verlet = |x: Vec3, p: Vec3, h: f64, before: Side, after: Side| -> Result<(Vec3, Vec3)> {
        let ph = axpy(0.5 * h, force(x, before)?, p);
        let xn = axpy(h / m, ph, x);
        let pn = axpy(0.5 * h, force(xn, after)?, ph);
        Ok((xn, pn))
    };
    let n_steps = ((t_final - t) / config.dt - 1e-9).ceil().max(1.0) as usize;
    for k in 0..n_steps {
        let h = if k + 1 == n_steps { t_final - t } else { config.dt };
        let l0 = lagrangian(x, p, side)?;
        let (mut xn, mut pn) = verlet(x, p, h, side, side)?;
        let crosses = side == Side::Gap && xn[2] >= config.anode;
        if crosses {
            // Crossing time from the constant-force parabola through the current state.
            let a = force(x, side)?[2] / m;
            let v = p[2] / m;
            let gap = config.anode - x[2];
            let sc = if a.abs() < 1e-300 {
                gap / v
            } else {
                let disc = (v * v + 2.0 * a * gap).max(0.0);
                2.0 * gap / (v + disc.sqrt())
            }
            .clamp(0.0, h);
            let (mut xa, pa) = verlet(x, p, sc, Side::Gap, Side::Gap)?;
            xa[2] = config.anode;
            let la = lagrangian(xa, pa, Side::Gap)?;
            s += 0.5 * sc * (l0 + la);
            let tc = t + sc;
            traj.anode_time = Some(tc);
            side = Side::Beyond;
            let rest = h - sc;
            let lb = lagrangian(xa, pa, side)?;
            let (xr, pr) = if rest > 0.0 { verlet(xa, pa, rest, side, side)? } else { (xa, pa) };
            xn = xr;
            pn = pr;
            let l1 = lagrangian(xn, pn, side)?;
            s += 0.5 * rest * (lb + l1);
        } else {
            let l1 = lagrangian(xn, pn, side)?;
            s += 0.5 * h * (l0 + l1);
        }
        t += h;
        if !config.in_domain(xn) || xn.iter().chain(&pn).any(|v| !v.is_finite()) {
            return Err(LabError::DomainExit { t, x3: xn[2] });
        }
        if side == Side::Beyond && xn[2] < config.anode {
            side = Side::Gap;
        }
        x = xn;
        p = pn;
        let (phi, _) = config.potential_at(x, side)?;
        traj.times.push(t);
        traj.positions.push(x);
        traj.momenta.push(p);
        traj.action.push(s);
        traj.hamiltonian.push(dot(p, p) / (2.0 * m) + e * phi);
    }
    traj.terminal_potential = config.potential_at(x, side)?.0;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeBroglie {
    pub k: Vec3,
    pub k_norm: f64,
    pub omega: f64,
    /// `|ħω − ħ²k²/2m|`.
    pub dispersion_gap: f64,
}

/// Wave vector and frequency of the emitted wave, `k = p*/ħ` and `ω = −eΦ*/ħ`.
pub fn de_broglie_check(traj: &Trajectory, constants: &PhysConstants) -> Result<DeBroglie> {
    constants.validate()?;
    let x = traj.final_position();
    if !traj.in_field_free_region() {
        return Err(LabError::NotFieldFree { x3: x[2], anode: traj.anode });
    }
    let hbar = constants.hbar;
    let p = traj.final_momentum();
    let k = [p[0] / hbar, p[1] / hbar, p[2] / hbar];
    let k_norm = dot(k, k).sqrt();
    let e_star = -constants.charge * traj.terminal_potential;
    let omega = e_star / hbar;
    let dispersion_gap = (hbar * omega - hbar * hbar * k_norm * k_norm / (2.0 * constants.mass)).abs();
    Ok(DeBroglie { k, k_norm, omega, dispersion_gap })
}

/// Phase `k·x − ωt` of the emitted plane wave.
pub fn gauge_phase(wave: &DeBroglie, x: Vec3, t: f64) -> f64 {
    dot(wave.k, x) - wave.omega * t
}

/// Factor `e^{ieΦ*t/ħ}` that removes the constant potential beyond the anode.
pub fn gauge_factor(constants: &PhysConstants, phi_star: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, constants.charge * phi_star * t / constants.hbar)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionGradient {
    /// Least-squares `∇S` at `(x*, t*)`.
    pub gradient: Vec3,
    pub momentum: Vec3,
    /// `‖∇S − p*‖ / ‖p*‖`, or the absolute error when `p* = 0`.
    pub relative_error: f64,
    /// `∂_t S` at the reference point.
    pub time_derivative: f64,
    /// Smallest singular value of the endpoint displacements.
    pub spread: f64,
}

/// Threshold below which the endpoint displacements cannot support a gradient.
pub const SPREAD_THRESHOLD: f64 = 1e-10;

/// Compares the action gradient with the momentum of the reference ray at `t_star`.
///
/// The family shifts the start transversally by `±spread` and the start time by
/// `±τ`, where `τ` moves the endpoint by about `spread` along the ray. Shifted starts
/// keep `S0 = p0·x0 − H0 t0`.
pub fn action_gradient_check(config: &GunConfig, start: RayStart, t_star: f64, spread: f64) -> Result<ActionGradient> {
    let center = trace_ray(config, start, t_star)?;
    let p_star = center.final_momentum();
    let x_star = center.final_position();
    let s_star = center.final_action();
    let speed = dot(p_star, p_star).sqrt() / config.constants.mass;
    let tau = if speed > 0.0 { spread / speed } else { spread };

    let mut rays = Vec::new();
    for axis in 0..2 {
        for sign in [-1.0, 1.0] {
            let mut s = start;
            s.position[axis] += sign * spread;
            rays.push(s);
        }
    }
    for sign in [-1.0, 1.0] {
        let mut s = start;
        s.time += sign * tau;
        rays.push(s);
    }
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    let mut rows = Vec::new();
    for r in &rays {
        let tr = trace_ray(config, *r, t_star)?;
        let x = tr.final_position();
        let d = Vector3::new(x[0] - x_star[0], x[1] - x_star[1], x[2] - x_star[2]);
        let ds = tr.final_action() - s_star;
        normal += d * d.transpose();
        rhs += d * ds;
        rows.push(d);
    }
    let sv = normal.symmetric_eigenvalues();
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
    if smallest < SPREAD_THRESHOLD {
        return Err(LabError::DegenerateSpread { spread: smallest });
    }
    let g = normal.lu().solve(&rhs).ok_or(LabError::DegenerateSpread { spread: smallest })?;
    let gradient = [g[0], g[1], g[2]];
    let diff = [gradient[0] - p_star[0], gradient[1] - p_star[1], gradient[2] - p_star[2]];
    let pn = dot(p_star, p_star).sqrt();
    let err = dot(diff, diff).sqrt();
    let relative_error = if pn > 0.0 { err / pn } else { err };

    // Rays emitted at t0 ± τ pass through x* at t* ± τ when the potential is static.
    let late = trace_ray(config, RayStart { time: start.time + tau, ..start }, t_star + tau)?;
    let early = trace_ray(config, RayStart { time: start.time - tau, ..start }, t_star - tau)?;
    let time_derivative = (late.final_action() - early.final_action()) / (2.0 * tau);
    Ok(ActionGradient { gradient, momentum: p_star, relative_error, time_derivative, spread: smallest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> GunConfig {
        GunConfig::linear_ramp(0.5, 1.0)
    }

    #[test]
    fn linear_ramp_exit_momentum() {
        let c = ramp();
        let tr = trace_ray(&c, c.emission_start(), 3.0).unwrap();
        let p = tr.final_momentum();
        assert!((p[2] - 1.0).abs() < 1e-8, "{p:?}");
        // Uniform acceleration 0.5 reaches D = 1 at t = 2.
        assert!((tr.anode_time.unwrap() - 2.0).abs() < 1e-9);
        assert!(tr.hamiltonian_drift() < 1e-10);
        // S = ∫ p² dt = ∫₀² t²/4 dt + 1·1.
        assert!((tr.final_action() - (2.0 / 3.0 + 1.0)).abs() < 1e-6, "{}", tr.final_action());
    }

    #[test]
    fn free_particle_at_rest() {
        let c = GunConfig { potential: GunPotential::Uniform { value: 0.0 }, ..ramp() };
        let tr = trace_ray(&c, c.emission_start(), 1.0).unwrap();
        assert_eq!(tr.final_position(), c.emission_start().position);
        assert_eq!(tr.final_action(), 0.0);
    }

    #[test]
    fn reversed_ramp_leaves_through_cathode() {
        let c = GunConfig::linear_ramp(-0.5, 1.0);
        let start = RayStart { position: [0.0, 0.0, 0.5], momentum: [0.0; 3], time: 0.0 };
        // Start inside the gap with H = 0.25 > 0 only allowed with spread.
        let c = GunConfig { emission_spread: 1.0, ..c };
        assert!(matches!(trace_ray(&c, start, 10.0), Err(LabError::DomainExit { .. })));
        let c = GunConfig::linear_ramp(-0.5, 1.0);
        assert!(matches!(trace_ray(&c, c.emission_start(), 10.0), Err(LabError::DomainExit { .. })));
    }

    #[test]
    fn emission_energy_is_checked() {
        let c = GunConfig { potential: GunPotential::Uniform { value: -1.0 }, ..ramp() };
        assert!(matches!(trace_ray(&c, c.emission_start(), 1.0), Err(LabError::EmissionEnergy { .. })));
        assert!(matches!(
            action_gradient_check(&c, c.emission_start(), 1.0, 1e-3),
            Err(LabError::EmissionEnergy { .. })
        ));
    }

    #[test]
    fn action_gradient_on_ramp() {
        let c = ramp();
        let r = action_gradient_check(&c, c.emission_start(), 2.5, 1e-3).unwrap();
        assert!(r.relative_error < 1e-4, "{r:?}");
        assert!(r.time_derivative.abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn free_action_gradient_is_exact() {
        let p = [0.3, -0.2, 0.7];
        let c = GunConfig { potential: GunPotential::Uniform { value: 0.0 }, emission_spread: 1.0, ..ramp() };
        let start = RayStart { position: [0.0, 0.0, 0.0], momentum: p, time: 0.0 };
        let tr = trace_ray(&c, start, 2.0).unwrap();
        let x = tr.final_position();
        let h = dot(p, p) / 2.0;
        assert!((tr.final_action() - (dot(p, x) - h * 2.0)).abs() < 1e-12);
        let r = action_gradient_check(&c, start, 2.0, 1e-3).unwrap();
        assert!(r.relative_error < 1e-9, "{r:?}");
        assert!((r.time_derivative + h).abs() < 1e-9);
    }

    #[test]
    fn degenerate_spread() {
        let c = ramp();
        assert!(matches!(
            action_gradient_check(&c, c.emission_start(), 2.5, 1e-13),
            Err(LabError::DegenerateSpread { .. })
        ));
    }

    #[test]
    fn de_broglie_relations() {
        for (phi, k, w) in [(0.5, 1.0, 0.5), (2.0, 2.0, 2.0)] {
            let c = GunConfig::linear_ramp(phi, 1.0);
            let tr = trace_ray(&c, c.emission_start(), 4.0).unwrap();
            let d = de_broglie_check(&tr, &c.constants).unwrap();
            assert!((d.k_norm - k).abs() < 1e-8 && (d.omega - w).abs() < 1e-12, "{d:?}");
            assert!(d.dispersion_gap <= 1e-8);
        }
        let c = ramp();
        let tr = trace_ray(&c, c.emission_start(), 1.0).unwrap();
        assert!(matches!(de_broglie_check(&tr, &c.constants), Err(LabError::NotFieldFree { .. })));
    }

    #[test]
    fn coarse_step_shows_in_the_gap() {
        let potential = GunPotential::SmoothRamp { phi_star: 0.5, coefficients: vec![0.5, -0.3] };
        let coarse = GunConfig { potential: potential.clone(), dt: 0.5, ..ramp() };
        let fine = GunConfig { potential, dt: 1e-3, ..ramp() };
        let gap = |c: &GunConfig| {
            de_broglie_check(&trace_ray(c, c.emission_start(), 5.0).unwrap(), &c.constants).unwrap().dispersion_gap
        };
        assert!(gap(&coarse) > 1e-8, "{}", gap(&coarse));
        assert!(gap(&fine) < gap(&coarse) * 1e-3);
    }

    #[test]
    fn gauge_bookkeeping() {
        let d = DeBroglie { k: [0.0, 0.0, 1.0], k_norm: 1.0, omega: 0.5, dispersion_gap: 0.0 };
        assert!(gauge_phase(&d, [0.0, 0.0, 2.0], 4.0).abs() < 1e-15);
        assert_eq!(gauge_phase(&d, [0.0, 0.0, 1.0], 0.0), 1.0);
        assert_eq!(gauge_factor(&PhysConstants::default(), 0.0, 3.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn action_is_additive() {
        let c = ramp();
        let whole = trace_ray(&c, c.emission_start(), 3.0).unwrap();
        let first = trace_ray(&c, c.emission_start(), 1.5).unwrap();
        let x = first.final_position();
        let p = first.final_momentum();
        let second = trace_ray(&c, RayStart { position: x, momentum: p, time: 1.5 }, 3.0).unwrap();
        let sum = first.action_increment() + second.action_increment();
        assert!((whole.action_increment() - sum).abs() < 1e-12);
    }

    #[test]
    fn table_matches_linear_ramp() {
        let table =
            PotentialTable::sample([-1.0, -1.0, 0.0], [0.5, 0.5, 0.05], [5, 5, 61], |x| 0.5 * x[2].min(1.0)).unwrap();
        let c = GunConfig { potential: GunPotential::Table(table), ..ramp() };
        let tr = trace_ray(&c, c.emission_start(), 2.5).unwrap();
        let d = de_broglie_check(&tr, &c.constants).unwrap();
        assert!((d.k_norm - 1.0).abs() < 1e-8 && d.dispersion_gap < 1e-8, "{d:?}");
        assert!(matches!(trace_ray(&c, c.emission_start(), 20.0), Err(LabError::DomainExit { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_smooth_ramps_obey_dispersion(
            phi in 0.2f64..3.0,
            b in proptest::collection::vec(-0.3f64..0.3, 0..4),
        ) {
            let c = GunConfig { potential: GunPotential::SmoothRamp { phi_star: phi, coefficients: b }, ..ramp() };
            let tr = trace_ray(&c, c.emission_start(), 6.0).unwrap();
            let d = de_broglie_check(&tr, &c.constants).unwrap();
            prop_assert!(d.dispersion_gap <= 1e-6 * phi, "{:?}", d);
            prop_assert!((d.omega - phi).abs() < 1e-12);
        }
    }
}
