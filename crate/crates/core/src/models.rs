//! The four model systems: right-hand sides, symmetry tags and group actions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysConstants;
use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::poly::Polynomial;
use crate::state::{Field, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `ψ̈ = ψ″ + δ(x) F(ψ(0,t))`, real field.
    LambString,
    /// `ψ̈ = ψ″ − m²ψ + δ(x) a(|ψ|²) ψ`, complex field.
    KGU1,
    /// `φ̈ = φ″ − U′(φ)` with `U(φ) = (φ² − 1)²/4`.
    Phi4,
    /// `iħψ̇ = −(ħ²/2m)ψ″ + V(x)ψ`.
    LinearSchrodinger,
}

impl ModelKind {
    /// Second order in time (leapfrog) models.
    pub fn is_wave(self) -> bool {
        !matches!(self, ModelKind::LinearSchrodinger)
    }

    /// Models whose nonlinearity acts only at x = 0.
    pub fn is_concentrated(self) -> bool {
        matches!(self, ModelKind::LambString | ModelKind::KGU1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    Trivial,
    Translation,
    U1,
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Symmetry::Trivial => "trivial",
            Symmetry::Translation => "translation",
            Symmetry::U1 => "U(1)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonlinearityMode {
    /// `F: ℝ → ℝ` given directly by its coefficients.
    RealScalar,
    /// `F(ψ) = a(|ψ|²) ψ`; the coefficients are those of `a`.
    U1Equivariant,
}

/// Polynomial nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub coefficients: Vec<f64>,
    pub mode: NonlinearityMode,
}

impl NonlinearitySpec {
    pub fn real(coefficients: Vec<f64>) -> Self {
        Self { coefficients, mode: NonlinearityMode::RealScalar }
    }

    pub fn u1(coefficients: Vec<f64>) -> Self {
        Self { coefficients, mode: NonlinearityMode::U1Equivariant }
    }

    pub fn zero(mode: NonlinearityMode) -> Self {
        Self { coefficients: Vec::new(), mode }
    }

    /// `F(y) = y − y³`.
    pub fn bistable() -> Self {
        Self::real(vec![0.0, 1.0, 0.0, -1.0])
    }

    /// `a(s) = s`: focusing, energy unbounded below.
    pub fn cubic_focusing() -> Self {
        Self::u1(vec![0.0, 1.0])
    }

    /// `a(s) = 2 − s`: attractive near zero, confining at large amplitude.
    pub fn confining() -> Self {
        Self::u1(vec![2.0, -1.0])
    }

    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(self.coefficients.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.polynomial().is_zero()
    }

    /// True iff `a` is non-constant (U(1) mode) or `F` is non-affine (real mode).
    pub fn is_strictly_nonlinear(&self) -> bool {
        let deg = self.polynomial().degree();
        match self.mode {
            NonlinearityMode::U1Equivariant => deg.is_some_and(|d| d >= 1),
            NonlinearityMode::RealScalar => deg.is_some_and(|d| d >= 2),
        }
    }

    #[inline]
    fn horner(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Force `F(z)`. Real mode uses `Re z`.
    #[inline]
    pub fn force(&self, z: Complex64) -> Complex64 {
        match self.mode {
            NonlinearityMode::RealScalar => Complex64::new(self.horner(z.re), 0.0),
            NonlinearityMode::U1Equivariant => z * self.horner(z.norm_sqr()),
        }
    }

    #[inline]
    pub fn force_real(&self, y: f64) -> f64 {
        self.horner(y)
    }

    /// Potential with `F = −∇U` and `U(0) = 0`: `−∫₀^y F` or `−½ A(|z|²)`, `A′ = a`.
    pub fn potential(&self, z: Complex64) -> f64 {
        let anti = self.polynomial().antiderivative();
        match self.mode {
            NonlinearityMode::RealScalar => -anti.eval(z.re),
            NonlinearityMode::U1Equivariant => -0.5 * anti.eval(z.norm_sqr()),
        }
    }
}

/// Group element acting on states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    Identity,
    /// `ψ ↦ e^{iθ} ψ`.
    Phase(f64),
    /// `ψ(x) ↦ ψ(x − s)`.
    Shift(f64),
}

/// A concrete model system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub mass: f64,
    pub nonlinearity: NonlinearitySpec,
    pub potential: Option<Vec<f64>>,
    pub symmetry: Symmetry,
    pub constants: PhysConstants,
}

impl ModelSpec {
    pub fn lamb_string(nonlinearity: NonlinearitySpec) -> Self {
        Self {
            kind: ModelKind::LambString,
            mass: 0.0,
            nonlinearity,
            potential: None,
            symmetry: Symmetry::Trivial,
            constants: PhysConstants::default(),
        }
    }

    pub fn kgu1(mass: f64, nonlinearity: NonlinearitySpec) -> Self {
        Self {
            kind: ModelKind::KGU1,
            mass,
            nonlinearity,
            potential: None,
            symmetry: Symmetry::U1,
            constants: PhysConstants::default(),
        }
    }

    pub fn phi4() -> Self {
        Self {
            kind: ModelKind::Phi4,
            mass: 0.0,
            nonlinearity: NonlinearitySpec::bistable(),
            potential: None,
            symmetry: Symmetry::Translation,
            constants: PhysConstants::default(),
        }
    }

    pub fn linear_schrodinger(potential: Vec<f64>, constants: PhysConstants) -> Self {
        Self {
            kind: ModelKind::LinearSchrodinger,
            mass: 0.0,
            nonlinearity: NonlinearitySpec::zero(NonlinearityMode::RealScalar),
            potential: Some(potential),
            symmetry: Symmetry::U1,
            constants,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(LabError::InvalidModel(msg.to_string()));
        if self.nonlinearity.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("nonlinearity coefficients must be finite");
        }
        self.constants.validate()?;
        match self.kind {
            ModelKind::LambString => {
                if self.mass != 0.0 {
                    return bad("LambString has mass 0");
                }
                if self.nonlinearity.mode != NonlinearityMode::RealScalar {
                    return bad("U(1) nonlinearity on the real LambString model");
                }
            }
            ModelKind::KGU1 => {
                if !(self.mass > 0.0 && self.mass.is_finite()) {
                    return bad("KGU1 requires mass > 0");
                }
                if self.nonlinearity.mode != NonlinearityMode::U1Equivariant {
                    return bad("KGU1 requires a U(1)-equivariant nonlinearity");
                }
            }
            ModelKind::Phi4 => {
                if self.nonlinearity.mode != NonlinearityMode::RealScalar {
                    return bad("U(1) nonlinearity on the real Phi4 model");
                }
            }
            ModelKind::LinearSchrodinger => {
                if !self.nonlinearity.is_zero() {
                    return bad("LinearSchrodinger has no nonlinearity");
                }
                match &self.potential {
                    Some(v) if v.iter().all(|x| x.is_finite()) => {}
                    Some(_) => return bad("potential samples must be finite"),
                    None => return bad("LinearSchrodinger requires sampled potential V(x)"),
                }
            }
        }
        if self.kind != ModelKind::LinearSchrodinger && self.potential.is_some() {
            return bad("sampled potential is only used by LinearSchrodinger");
        }
        Ok(())
    }

    /// Checks the state against the model: lengths, origin node, real fields.
    pub fn check_state(&self, state: &SimState) -> Result<()> {
        self.validate()?;
        state.check_lengths()?;
        if let Some(v) = &self.potential {
            if v.len() != state.grid.len() {
                return Err(LabError::GridMismatch { expected: state.grid.len(), found: v.len() });
            }
        }
        if self.kind.is_concentrated() && state.grid.origin().is_none() {
            return Err(LabError::MissingOriginNode);
        }
        if self.kind.is_wave() && state.velocity.is_none() {
            return Err(LabError::InvalidArgument(format!("{:?} states need a velocity field", self.kind)));
        }
        Ok(())
    }

    /// Lowest value of `−∫₀^φ F` over the zeros of `F`; subtracted so the vacuum has zero energy.
    pub(crate) fn vacuum_level(&self) -> f64 {
        let p = self.nonlinearity.polynomial();
        let anti = p.antiderivative();
        p.real_roots().iter().map(|&r| -anti.eval(r)).fold(f64::INFINITY, f64::min).min(0.0)
    }
}

/// Square double well `V = −depth` on `|x ∓ offset| < width/2`, zero elsewhere.
pub fn double_well_potential(grid: &Grid1D, depth: f64, offset: f64, width: f64) -> Vec<f64> {
    grid.nodes()
        .into_iter()
        .map(|x| if (x - offset).abs() < 0.5 * width || (x + offset).abs() < 0.5 * width { -depth } else { 0.0 })
        .collect()
}

/// Evaluates right-hand sides without reallocating; shared with the steppers.
pub(crate) struct Dynamics<'a> {
    pub model: &'a ModelSpec,
    pub origin: Option<usize>,
    inv_dx: f64,
    inv_dx2: f64,
    n: usize,
}

impl<'a> Dynamics<'a> {
    pub fn new(model: &'a ModelSpec, grid: &Grid1D) -> Result<Self> {
        model.validate()?;
        let origin = grid.origin();
        if model.kind.is_concentrated() && origin.is_none() {
            return Err(LabError::MissingOriginNode);
        }
        Ok(Self { model, origin, inv_dx: 1.0 / grid.dx(), inv_dx2: 1.0 / (grid.dx() * grid.dx()), n: grid.len() })
    }

    /// Acceleration of a wave-type model; end nodes are held fixed.
    pub fn acceleration(&self, field: &Field, out: &mut Field) {
        let n = self.n;
        let (re, im) = (&field.re, &field.im);
        let m2 = self.model.mass * self.model.mass;
        out.re[0] = 0.0;
        out.im[0] = 0.0;
        out.re[n - 1] = 0.0;
        out.im[n - 1] = 0.0;
        for i in 1..n - 1 {
            out.re[i] = (re[i + 1] - 2.0 * re[i] + re[i - 1]) * self.inv_dx2;
            out.im[i] = (im[i + 1] - 2.0 * im[i] + im[i - 1]) * self.inv_dx2;
        }
        match self.model.kind {
            ModelKind::LambString => {}
            ModelKind::KGU1 => {
                for i in 1..n - 1 {
                    out.re[i] -= m2 * re[i];
                    out.im[i] -= m2 * im[i];
                }
            }
            ModelKind::Phi4 => {
                let nl = &self.model.nonlinearity;
                for i in 1..n - 1 {
                    out.re[i] += nl.force_real(re[i]);
                }
            }
            ModelKind::LinearSchrodinger => unreachable!("first-order model"),
        }
        if self.model.kind.is_concentrated() {
            let o = self.origin.expect("checked in new");
            if o > 0 && o + 1 < n {
                let f = self.model.nonlinearity.force(field.get(o));
                out.re[o] += f.re * self.inv_dx;
                out.im[o] += f.im * self.inv_dx;
            }
        }
    }

    /// `ψ̇ = −(i/ħ) H ψ` for the Schrödinger model; end nodes are held at zero.
    pub fn schrodinger(&self, field: &Field, out: &mut Field) {
        let n = self.n;
        let c = &self.model.constants;
        let kin = c.hbar * c.hbar / (2.0 * c.mass) * self.inv_dx2;
        let v = self.model.potential.as_deref().expect("validated");
        out.re[0] = 0.0;
        out.im[0] = 0.0;
        out.re[n - 1] = 0.0;
        out.im[n - 1] = 0.0;
        for i in 1..n - 1 {
            let hre = -kin * (field.re[i + 1] - 2.0 * field.re[i] + field.re[i - 1]) + v[i] * field.re[i];
            let him = -kin * (field.im[i + 1] - 2.0 * field.im[i] + field.im[i - 1]) + v[i] * field.im[i];
            // −i (a + ib) = b − ia
            out.re[i] = him / c.hbar;
            out.im[i] = -hre / c.hbar;
        }
    }
}

/// Right-hand side: acceleration for wave models, `ψ̇` for LinearSchrodinger.
///
/// `δ(x)` is the grid function `1/dx` at the origin node.
pub fn rhs(state: &SimState, model: &ModelSpec) -> Result<Field> {
    model.check_state(state)?;
    if matches!(model.kind, ModelKind::LambString | ModelKind::Phi4) && !state.field.is_real() {
        return Err(LabError::InvalidArgument(format!("{:?} field must be real", model.kind)));
    }
    let dynamics = Dynamics::new(model, &state.grid)?;
    let mut out = Field::zeros(state.grid.len());
    if model.kind.is_wave() {
        dynamics.acceleration(&state.field, &mut out);
    } else {
        dynamics.schrodinger(&state.field, &mut out);
    }
    Ok(out)
}

/// Applies a group element to the state.
///
/// Shifts resample by linear interpolation and hold the edge value outside the grid.
pub fn symmetry_action(state: &SimState, model: &ModelSpec, element: GroupElement) -> Result<SimState> {
    let wrong =
        || LabError::WrongGroupElement { element: format!("{element:?}"), symmetry: model.symmetry.to_string() };
    match element {
        GroupElement::Identity => Ok(state.clone()),
        GroupElement::Phase(theta) => {
            if model.symmetry != Symmetry::U1 {
                return Err(wrong());
            }
            Ok(state.rotated(theta))
        }
        GroupElement::Shift(s) => {
            if model.symmetry != Symmetry::Translation {
                return Err(wrong());
            }
            let grid = state.grid;
            let resample = |f: &Field| shift_field(f, &grid, s);
            Ok(SimState {
                t: state.t,
                grid,
                field: resample(&state.field),
                velocity: state.velocity.as_ref().map(resample),
            })
        }
    }
}

fn shift_field(f: &Field, grid: &Grid1D, s: f64) -> Field {
    let n = grid.len();
    let sample = |v: &[f64], pos: f64| -> f64 {
        if pos <= 0.0 {
            return v[0];
        }
        if pos >= (n - 1) as f64 {
            return v[n - 1];
        }
        let nearest = pos.round();
        if (pos - nearest).abs() <= 1e-9 {
            return v[nearest as usize];
        }
        let j = pos.floor() as usize;
        let w = pos - j as f64;
        (1.0 - w) * v[j] + w * v[j + 1]
    };
    let positions: Vec<f64> = (0..n).map(|i| i as f64 - s / grid.dx()).collect();
    Field {
        re: positions.iter().map(|&p| sample(&f.re, p)).collect(),
        im: positions.iter().map(|&p| sample(&f.im, p)).collect(),
    }
}
