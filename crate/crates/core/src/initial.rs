//! Seeded random initial data: an annular bump times a random polynomial.
//!
//! The bump vanishes on `|x| < inner_radius`, so the data satisfy the jump condition at
//! the origin and do not excite the grid-scale mode of the discrete δ.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::state::{Field, SimState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomData {
    #[serde(default = "default_inner")]
    pub inner_radius: f64,
    #[serde(default = "default_outer")]
    pub outer_radius: f64,
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Target value of `½∫(|ψ̇|² + |ψ′|² + m²|ψ|²)`.
    #[serde(default = "default_energy")]
    pub energy: f64,
    /// Complex coefficients (U(1) models).
    #[serde(default)]
    pub complex: bool,
}

fn default_inner() -> f64 {
    0.5
}
fn default_outer() -> f64 {
    4.0
}
fn default_degree() -> usize {
    3
}
fn default_energy() -> f64 {
    1.0
}

impl Default for RandomData {
    fn default() -> Self {
        Self {
            inner_radius: default_inner(),
            outer_radius: default_outer(),
            degree: default_degree(),
            energy: default_energy(),
            complex: false,
        }
    }
}

impl RandomData {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius >= 0.0 && self.outer_radius > self.inner_radius && self.outer_radius.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "need 0 ≤ inner_radius < outer_radius, got {} and {}",
                self.inner_radius, self.outer_radius
            )));
        }
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(LabError::InvalidArgument(format!("energy must be positive, got {}", self.energy)));
        }
        Ok(())
    }

    /// `sin⁴(πu)` with `u = (|x| − r₀)/(r₁ − r₀)` on the annulus, zero elsewhere.
    pub fn bump(&self, x: f64) -> f64 {
        let u = (x.abs() - self.inner_radius) / (self.outer_radius - self.inner_radius);
        if u > 0.0 && u < 1.0 {
            (std::f64::consts::PI * u).sin().powi(4)
        } else {
            0.0
        }
    }

    /// Draws field and velocity for `seed` and rescales them to the target energy.
    pub fn sample(&self, grid: &Grid1D, mass: f64, seed: u64) -> Result<SimState> {
        self.validate()?;
        if grid.half_extent() < self.outer_radius {
            return Err(LabError::DomainTooSmall { required: self.outer_radius, available: grid.half_extent() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..=self.degree)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = if self.complex { StandardNormal.sample(rng) } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect()
        };
        let c = draw(&mut rng);
        let d = draw(&mut rng);
        let r = self.outer_radius;
        let poly =
            |coef: &[Complex64], x: f64| coef.iter().rev().fold(Complex64::default(), |acc, &k| acc * (x / r) + k);
        let field = Field::from_fn(grid, |x| poly(&c, x) * self.bump(x));
        let velocity = Field::from_fn(grid, |x| poly(&d, x) * self.bump(x));
        let e = quadratic_energy(grid, &field, &velocity, mass);
        if e == 0.0 {
            return Err(LabError::InvalidArgument("random data vanished on this grid".into()));
        }
        let scale = (self.energy / e).sqrt();
        SimState::new(*grid, field.scaled(scale), Some(velocity.scaled(scale)))
    }

    /// Time after which the data no longer influence `x = 0`, plus one unit of settling.
    pub fn exit_time(&self) -> f64 {
        self.outer_radius + 1.0
    }
}

/// `½∫(|v|² + |ψ′|² + m²|ψ|²)` with the same quadrature as the discrete Hamiltonian.
pub fn quadratic_energy(grid: &Grid1D, field: &Field, velocity: &Field, mass: f64) -> f64 {
    let dx = grid.dx();
    let mut e = 0.0;
    for i in 0..grid.len() {
        let w = grid.trapezoid_weight(i) * dx;
        e += 0.5 * w * (velocity.get(i).norm_sqr() + mass * mass * field.get(i).norm_sqr());
        if i + 1 < grid.len() {
            e += 0.5 * (field.get(i + 1) - field.get(i)).norm_sqr() / dx;
        }
    }
    e
}
