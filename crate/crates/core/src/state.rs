use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid1D;

/// Complex samples stored as separate real and imaginary arrays.
///
/// Real models keep `im` identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Field {
    pub fn zeros(n: usize) -> Self {
        Self { re: vec![0.0; n], im: vec![0.0; n] }
    }

    pub fn from_real(re: Vec<f64>) -> Self {
        let n = re.len();
        Self { re, im: vec![0.0; n] }
    }

    pub fn from_parts(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(LabError::GridMismatch { expected: re.len(), found: im.len() });
        }
        Ok(Self { re, im })
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let (re, im) = (0..grid.len()).map(|i| f(grid.x(i))).map(|z| (z.re, z.im)).unzip();
        Self { re, im }
    }

    pub fn from_real_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self::from_real((0..grid.len()).map(|i| f(grid.x(i))).collect())
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, z: Complex64) {
        self.re[i] = z.re;
        self.im[i] = z.im;
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i))
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|&v| v == 0.0)
    }

    /// Multiplies every sample by `e^{iθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let re = self.re.iter().zip(&self.im).map(|(&a, &b)| c * a - s * b).collect();
        let im = self.re.iter().zip(&self.im).map(|(&a, &b)| s * a + c * b).collect();
        Self { re, im }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { re: self.re.iter().map(|v| v * factor).collect(), im: self.im.iter().map(|v| v * factor).collect() }
    }

    pub fn mul_complex(&self, z: Complex64) -> Self {
        Self::from_iter_complex(self.iter().map(|v| v * z))
    }

    pub fn from_iter_complex(it: impl IntoIterator<Item = Complex64>) -> Self {
        let (re, im) = it.into_iter().map(|z| (z.re, z.im)).unzip();
        Self { re, im }
    }

    pub fn sub(&self, other: &Field) -> Self {
        Self {
            re: self.re.iter().zip(&other.re).map(|(a, b)| a - b).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Self {
        Self {
            re: self.re.iter().zip(&other.re).map(|(a, b)| a + b).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }
}

/// Field and velocity on a grid at time `t`.
///
/// `velocity` is `None` for first-order (Schrödinger) evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub grid: Grid1D,
    pub field: Field,
    pub velocity: Option<Field>,
}

impl SimState {
    pub fn new(grid: Grid1D, field: Field, velocity: Option<Field>) -> Result<Self> {
        let s = Self { t: 0.0, grid, field, velocity };
        s.check_lengths()?;
        Ok(s)
    }

    pub fn zero(grid: Grid1D, with_velocity: bool) -> Self {
        let n = grid.len();
        Self { t: 0.0, grid, field: Field::zeros(n), velocity: with_velocity.then(|| Field::zeros(n)) }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn check_lengths(&self) -> Result<()> {
        let n = self.grid.len();
        if self.field.len() != n || self.field.im.len() != n {
            return Err(LabError::GridMismatch { expected: n, found: self.field.len() });
        }
        if let Some(v) = &self.velocity {
            if v.len() != n || v.im.len() != n {
                return Err(LabError::GridMismatch { expected: n, found: v.len() });
            }
        }
        Ok(())
    }

    /// Applies `e^{iθ}` to field and velocity alike.
    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            t: self.t,
            grid: self.grid,
            field: self.field.rotated(theta),
            velocity: self.velocity.as_ref().map(|v| v.rotated(theta)),
        }
    }
}

/// Uniformly sampled complex time series, typically the trace `ψ(0, t)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl TraceSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let s = Self { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn from_real(times: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(times, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { times: Vec::with_capacity(n), values: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, t: f64, value: Complex64) {
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing (first interval).
    pub fn dt(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Times strictly increasing and uniformly spaced within 1e-12 relative.
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(LabError::InvalidArgument(format!(
                "trace has {} times but {} values",
                self.times.len(),
                self.values.len()
            )));
        }
        let Some(h) = self.dt() else { return Ok(()) };
        if !(h > 0.0) {
            return Err(LabError::InvalidArgument("trace times must be strictly increasing".into()));
        }
        let t0 = self.times[0];
        for (k, &t) in self.times.iter().enumerate() {
            let expected = t0 + k as f64 * h;
            if (t - expected).abs() > 1e-12 * expected.abs().max(h * (k as f64).max(1.0)) {
                return Err(LabError::InvalidArgument(format!(
                    "trace sample {k} at t = {t} is not on the uniform lattice"
                )));
            }
        }
        Ok(())
    }

    /// Samples with `t >= t_start`, as a new series.
    pub fn tail_from(&self, t_start: f64) -> Self {
        let k = self.times.partition_point(|&t| t < t_start);
        Self { times: self.times[k..].to_vec(), values: self.values[k..].to_vec() }
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_by_pi_negates() {
        let f = Field::from_parts(vec![1.0, -2.0], vec![0.5, 0.0]).unwrap();
        let g = f.rotated(std::f64::consts::PI);
        assert!(g.add(&f).max_abs() < 1e-15);
    }

    #[test]
    fn trace_rejects_non_uniform_times() {
        let z = Complex64::new(0.0, 0.0);
        assert!(TraceSeries::new(vec![0.0, 1.0, 2.5], vec![z; 3]).is_err());
        assert!(TraceSeries::new(vec![0.0, 0.0], vec![z; 2]).is_err());
        assert!(TraceSeries::new(vec![0.0, 0.1, 0.2], vec![z; 3]).is_ok());
    }

    #[test]
    fn state_length_mismatch() {
        let g = Grid1D::symmetric(1.0, 0.5).unwrap();
        assert!(SimState::new(g, Field::zeros(4), None).is_err());
        assert!(SimState::new(g, Field::zeros(5), Some(Field::zeros(3))).is_err());
    }
}
