//! Fraunhofer diffraction by rectangular apertures in the plane `x3 = 0`, the
//! current density on a flat screen `x3 = L`, and the ratio of current to density.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysConstants;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: [f64; 2],
    /// Extent along `y1`.
    pub width: f64,
    /// Extent along `y2`.
    pub height: f64,
}

impl Rect {
    fn overlaps(&self, other: &Rect) -> bool {
        (self.center[0] - other.center[0]).abs() < 0.5 * (self.width + other.width)
            && (self.center[1] - other.center[1]).abs() < 0.5 * (self.height + other.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ApertureSpec {
    /// Two slits of width `w` centred at `y1 = ±d/2`.
    TwoSlits {
        width: f64,
        separation: f64,
        height: f64,
    },
    SingleRect {
        width: f64,
        height: f64,
    },
    Custom {
        rects: Vec<Rect>,
    },
}

/// Largest `k ξ Δ` on a quadrature panel; keeps the midpoint error near 1e-7.
const PHASE_PER_PANEL: f64 = 2e-3;
/// Agreement between quadrature and closed form that counts as a failure.
pub const QUADRATURE_FAILURE: f64 = 1e-4;
/// Relative threshold on `|a|²` for points entering ratio statistics.
pub const DENSITY_THRESHOLD: f64 = 1e-6;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl ApertureSpec {
    pub fn rectangles(&self) -> Vec<Rect> {
        match *self {
            ApertureSpec::TwoSlits { width, separation, height } => {
                [-0.5, 0.5].iter().map(|s| Rect { center: [s * separation, 0.0], width, height }).collect()
            }
            ApertureSpec::SingleRect { width, height } => vec![Rect { center: [0.0, 0.0], width, height }],
            ApertureSpec::Custom { ref rects } => rects.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rects = self.rectangles();
        if rects.is_empty() {
            return Err(LabError::InvalidArgument("aperture has no openings".into()));
        }
        for r in &rects {
            if !(r.width > 0.0 && r.height > 0.0 && r.width.is_finite() && r.height.is_finite()) {
                return Err(LabError::InvalidArgument(format!("aperture sizes must be positive, got {r:?}")));
            }
        }
        if let ApertureSpec::TwoSlits { width, separation, .. } = *self {
            if !(separation > width) {
                return Err(LabError::InvalidArgument(format!(
                    "slits overlap: separation {separation} must exceed width {width}"
                )));
            }
        }
        for (i, a) in rects.iter().enumerate() {
            if rects[i + 1..].iter().any(|b| a.overlaps(b)) {
                return Err(LabError::InvalidArgument("aperture rectangles overlap".into()));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.rectangles().iter().map(|r| r.width * r.height).sum()
    }

    /// `∫_Q e^{−ik(ξ1 y1 + ξ2 y2)} dy` as a sum of products of cardinal sines.
    pub fn integral_closed_form(&self, k: f64, xi: [f64; 2]) -> Complex64 {
        self.rectangles()
            .iter()
            .map(|r| {
                let (a1, a2) = (k * xi[0], k * xi[1]);
                let shift = Complex64::from_polar(1.0, -(a1 * r.center[0] + a2 * r.center[1]));
                shift * r.width * sinc(0.5 * a1 * r.width) * r.height * sinc(0.5 * a2 * r.height)
            })
            .sum()
    }

    /// Same integral by the midpoint rule on panels no larger than `λ/16`.
    pub fn integral_quadrature(&self, k: f64, xi: [f64; 2]) -> Complex64 {
        let lambda = 2.0 * PI / k;
        let line = |a: f64, lo: f64, len: f64| -> Complex64 {
            let mut panel = lambda / 16.0;
            if a.abs() > 0.0 {
                panel = panel.min(PHASE_PER_PANEL / a.abs());
            }
            let n = (len / panel).ceil().max(1.0) as usize;
            let h = len / n as f64;
            (0..n).map(|j| Complex64::from_polar(h, -a * (lo + (j as f64 + 0.5) * h))).sum()
        };
        self.rectangles()
            .iter()
            .map(|r| {
                let (a1, a2) = (k * xi[0], k * xi[1]);
                line(a1, r.center[0] - 0.5 * r.width, r.width) * line(a2, r.center[1] - 0.5 * r.height, r.height)
            })
            .sum()
    }

    fn is_two_slit(&self) -> Option<(f64, f64)> {
        match *self {
            ApertureSpec::TwoSlits { width, separation, .. } => Some((width, separation)),
            _ => None,
        }
    }
}

/// Screen plane `x3 = L` with a lattice symmetric about the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSpec {
    pub distance: f64,
    pub half_width: [f64; 2],
    pub points: [usize; 2],
    /// Bound `C` on `|(x1, x2)|`; defaults to `L/2`.
    #[serde(default)]
    pub paraxial_limit: Option<f64>,
}

impl ScreenSpec {
    pub fn new(distance: f64, half_width: [f64; 2], points: [usize; 2]) -> Self {
        Self { distance, half_width, points, paraxial_limit: None }
    }

    fn axis(&self, a: usize) -> Vec<f64> {
        let n = self.points[a];
        if n == 1 {
            return vec![0.0];
        }
        let m = (n - 1) as f64;
        (0..n).map(|i| self.half_width[a] * (2.0 * i as f64 - m) / m).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return Err(LabError::InvalidArgument(format!("screen distance must be positive, got {}", self.distance)));
        }
        for a in 0..2 {
            if self.points[a] == 0 || !(self.half_width[a] >= 0.0) || (self.points[a] > 1 && self.half_width[a] == 0.0)
            {
                return Err(LabError::InvalidArgument("screen lattice needs positive extent and points".into()));
            }
        }
        let limit = self.paraxial_limit.unwrap_or(0.5 * self.distance);
        let corner = self.half_width[0].hypot(self.half_width[1]);
        if corner > limit * (1.0 + 1e-12) {
            return Err(LabError::InvalidArgument(format!(
                "screen corner at radius {corner} lies outside the paraxial window {limit}"
            )));
        }
        Ok(())
    }
}

/// Complex amplitude on the screen lattice and on two nearby planes `L ± dz`,
/// the latter only for the normal derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeField {
    pub screen_distance: f64,
    pub k: f64,
    pub a_in: Complex64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub dz: f64,
    /// Planes `L − dz`, `L`, `L + dz`, each indexed `i1 * n2 + i2`.
    pub planes: [Vec<Complex64>; 3],
    /// Largest quadrature-vs-closed-form gap relative to the aperture area.
    pub quadrature_error: f64,
}

impl AmplitudeField {
    /// Samples an arbitrary amplitude `f(x1, x2, x3)` on the screen lattice.
    pub fn from_fn(screen: &ScreenSpec, k: f64, a_in: Complex64, f: impl Fn([f64; 3]) -> Complex64) -> Result<Self> {
        screen.validate()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(LabError::InvalidArgument(format!("wave number must be positive, got {k}")));
        }
        let x1 = screen.axis(0);
        let x2 = screen.axis(1);
        let dz = 1e-5 * 2.0 * PI / k;
        let l = screen.distance;
        let plane = |z: f64| -> Vec<Complex64> {
            x1.iter().flat_map(|&a| x2.iter().map(move |&b| (a, b))).map(|(a, b)| f([a, b, z])).collect()
        };
        let planes = [plane(l - dz), plane(l), plane(l + dz)];
        Ok(Self { screen_distance: l, k, a_in, x1, x2, dz, planes, quadrature_error: 0.0 })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.planes[1]
    }

    pub fn get(&self, i1: usize, i2: usize) -> Complex64 {
        self.planes[1][i1 * self.x2.len() + i2]
    }

    pub fn peak_density(&self) -> f64 {
        self.samples().iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }

    /// `∇a` at a lattice point: centred differences across the lattice, one-sided at
    /// its edges, zero along an axis with a single point.
    pub fn gradient(&self, i1: usize, i2: usize) -> [Complex64; 3] {
        let n2 = self.x2.len();
        let at = |a: usize, b: usize| self.planes[1][a * n2 + b];
        let diff = |n: usize, i: usize, xs: &[f64], f: &dyn Fn(usize) -> Complex64| -> Complex64 {
            if n == 1 {
                return Complex64::new(0.0, 0.0);
            }
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (f(hi) - f(lo)) / (xs[hi] - xs[lo])
        };
        let d1 = diff(self.x1.len(), i1, &self.x1, &|a| at(a, i2));
        let d2 = diff(n2, i2, &self.x2, &|b| at(i1, b));
        let idx = i1 * n2 + i2;
        let d3 = (self.planes[2][idx] - self.planes[0][idx]) / (2.0 * self.dz);
        [d1, d2, d3]
    }

    /// Largest `‖∇a − ik a e3‖ / (k|a|)` over points above the density threshold.
    pub fn gradient_deviation(&self) -> f64 {
        let floor = DENSITY_THRESHOLD * self.peak_density();
        let i = Complex64::i();
        let mut worst = 0.0f64;
        for i1 in 0..self.x1.len() {
            for i2 in 0..self.x2.len() {
                let a = self.get(i1, i2);
                if a.norm_sqr() < floor || a.norm_sqr() == 0.0 {
                    continue;
                }
                let g = self.gradient(i1, i2);
                let r = g[2] - i * self.k * a;
                let dev = (g[0].norm_sqr() + g[1].norm_sqr() + r.norm_sqr()).sqrt() / (self.k * a.norm());
                worst = worst.max(dev);
            }
        }
        worst
    }

    fn lattice_spacing(&self) -> f64 {
        let step = |xs: &[f64]| if xs.len() > 1 { xs[1] - xs[0] } else { 0.0 };
        step(&self.x1).max(step(&self.x2))
    }
}

/// Fraunhofer amplitude
/// `a(x) = −ik a_in (1 + ξ3) e^{ik|x|} / ((4π)² |x|) · ∫_Q e^{−ik(ξ1 y1 + ξ2 y2)} dy`, `ξ = x/|x|`.
///
/// The stored values use the closed form; the midpoint quadrature runs on the
/// screen plane as a consistency check.
pub fn kirchhoff_amplitude(
    aperture: &ApertureSpec,
    k: f64,
    a_in: Complex64,
    screen: &ScreenSpec,
) -> Result<AmplitudeField> {
    aperture.validate()?;
    let amplitude = |x: [f64; 3], integral: &dyn Fn([f64; 2]) -> Complex64| -> Complex64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let xi = [x[0] / r, x[1] / r, x[2] / r];
        let pre =
            -Complex64::i() * k * a_in * (1.0 + xi[2]) * Complex64::from_polar(1.0, k * r) / ((4.0 * PI).powi(2) * r);
        pre * integral([xi[0], xi[1]])
    };
    let mut field =
        AmplitudeField::from_fn(screen, k, a_in, |x| amplitude(x, &|xi| aperture.integral_closed_form(k, xi)))?;
    let area = aperture.area();
    let l = screen.distance;
    let mut worst = 0.0f64;
    for &a in &field.x1 {
        for &b in &field.x2 {
            let r = (a * a + b * b + l * l).sqrt();
            let xi = [a / r, b / r];
            let gap = (aperture.integral_quadrature(k, xi) - aperture.integral_closed_form(k, xi)).norm() / area;
            worst = worst.max(gap);
        }
    }
    if worst > QUADRATURE_FAILURE {
        return Err(LabError::QuadratureMismatch { relative: worst });
    }
    field.quadrature_error = worst;
    Ok(field)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentField {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// `j` at each lattice point, indexed `i1 * n2 + i2`.
    pub samples: Vec<[f64; 3]>,
}

impl CurrentField {
    /// Largest `|j⊥| / |j3|` over points where `|a|²` clears the density threshold.
    pub fn max_transverse_ratio(&self, amp: &AmplitudeField) -> f64 {
        let floor = DENSITY_THRESHOLD * amp.peak_density();
        self.samples
            .iter()
            .zip(amp.samples())
            .filter(|(_, a)| a.norm_sqr() >= floor && a.norm_sqr() > 0.0)
            .map(|(j, _)| j[0].hypot(j[1]) / j[2].abs())
            .fold(0.0, f64::max)
    }
}

/// `j = (e/m) Re(ā (−iħ∇) a) = (eħ/m) Im(ā ∇a)`.
pub fn current_density(amp: &AmplitudeField, constants: &PhysConstants) -> Result<CurrentField> {
    constants.validate()?;
    let limit = 2.0 * PI / amp.k / 8.0;
    let spacing = amp.lattice_spacing();
    if spacing > limit {
        return Err(LabError::LatticeTooCoarse { spacing, limit });
    }
    let scale = constants.charge * constants.hbar / constants.mass;
    let mut samples = Vec::with_capacity(amp.samples().len());
    for i1 in 0..amp.x1.len() {
        for i2 in 0..amp.x2.len() {
            let a = amp.get(i1, i2).conj();
            let g = amp.gradient(i1, i2);
            samples.push([scale * (a * g[0]).im, scale * (a * g[1]).im, scale * (a * g[2]).im]);
        }
    }
    Ok(CurrentField { x1: amp.x1.clone(), x2: amp.x2.clone(), samples })
}

/// Spread of `r = j3 / |a|²` over the screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornCheck {
    /// `(max r − min r) / |median r|`.
    pub ratio_spread: f64,
    pub median_ratio: f64,
    pub points: usize,
    pub verdict: bool,
}

pub const BORN_SPREAD_LIMIT: f64 = 0.05;

pub fn born_ratio_check(current: &CurrentField, amp: &AmplitudeField) -> Result<BornCheck> {
    if current.samples.len() != amp.samples().len() {
        return Err(LabError::GridMismatch { expected: amp.samples().len(), found: current.samples.len() });
    }
    let peak = amp.peak_density();
    if peak == 0.0 {
        return Err(LabError::BelowThreshold);
    }
    let floor = DENSITY_THRESHOLD * peak;
    let mut ratios: Vec<f64> = current
        .samples
        .iter()
        .zip(amp.samples())
        .filter(|(_, a)| a.norm_sqr() >= floor)
        .map(|(j, a)| j[2] / a.norm_sqr())
        .collect();
    if ratios.is_empty() {
        return Err(LabError::BelowThreshold);
    }
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median = if n % 2 == 1 { ratios[n / 2] } else { 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]) };
    let spread = (ratios[n - 1] - ratios[0]) / median.abs();
    Ok(BornCheck { ratio_spread: spread, median_ratio: median, points: n, verdict: spread <= BORN_SPREAD_LIMIT })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeGeometry {
    /// Peak positions along `x1` on the row `x2 = 0`, refined by parabolas.
    pub peaks: Vec<f64>,
    /// Mean spacing of the central peak and its two neighbours.
    pub spacing: f64,
    /// `λL/d`.
    pub expected_spacing: f64,
    pub relative_error: f64,
    /// Nulls of the single-slit envelope inside the lattice.
    pub envelope_nulls: Vec<f64>,
}

pub fn fringe_geometry(aperture: &ApertureSpec, amp: &AmplitudeField) -> Result<FringeGeometry> {
    let (width, separation) = aperture.is_two_slit().ok_or(LabError::NotTwoSlit)?;
    let n2 = amp.x2.len();
    let row = (0..n2).min_by(|&a, &b| amp.x2[a].abs().total_cmp(&amp.x2[b].abs())).expect("nonempty lattice");
    let m: Vec<f64> = (0..amp.x1.len()).map(|i| amp.get(i, row).norm()).collect();
    let h = if amp.x1.len() > 1 { amp.x1[1] - amp.x1[0] } else { 0.0 };
    let mut peaks = Vec::new();
    for i in 1..m.len().saturating_sub(1) {
        if m[i] > m[i - 1] && m[i] >= m[i + 1] {
            let denom = m[i - 1] - 2.0 * m[i] + m[i + 1];
            let shift = if denom != 0.0 { 0.5 * (m[i - 1] - m[i + 1]) / denom } else { 0.0 };
            peaks.push(amp.x1[i] + shift * h);
        }
    }
    if peaks.len() < 3 {
        return Err(LabError::TooFewPeaks { found: peaks.len() });
    }
    let c = (0..peaks.len())
        .min_by(|&a, &b| peaks[a].abs().total_cmp(&peaks[b].abs()))
        .expect("nonempty")
        .clamp(1, peaks.len() - 2);
    let spacing = 0.5 * (peaks[c + 1] - peaks[c - 1]);
    let lambda = 2.0 * PI / amp.k;
    let l = amp.screen_distance;
    let expected = lambda * l / separation;
    let x_max = amp.x1.last().copied().unwrap_or(0.0);
    let mut envelope_nulls = Vec::new();
    for n in 1.. {
        let s = 2.0 * PI * n as f64 / (amp.k * width);
        if s >= 1.0 {
            break;
        }
        let x = l * s / (1.0 - s * s).sqrt();
        if x > x_max {
            break;
        }
        envelope_nulls.extend([-x, x]);
    }
    envelope_nulls.sort_by(f64::total_cmp);
    Ok(FringeGeometry {
        peaks,
        spacing,
        expected_spacing: expected,
        relative_error: (spacing - expected).abs() / expected,
        envelope_nulls,
    })
}
