//! Least-squares kink fit for the φ⁴ model.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::state::SimState;
use crate::stationary::{kink_rate, kink_value};

/// Largest admissible fitted speed.
pub const MAX_SPEED: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonFit {
    pub velocity: f64,
    pub center: f64,
    /// `+1` for a kink (−1 → +1), `−1` for an antikink.
    pub polarity: f64,
    /// L² misfit of the field over `|x − center| < radius`.
    pub residual: f64,
    /// L² norm of the field over the same window.
    pub norm: f64,
}

fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Fits `±tanh(γ(x − x₀)/√2)` (and its time derivative) to the state.
///
/// The centre is seeded at the zero crossing nearest the centroid of `|φ′|`; `v` is found
/// by a coarse scan followed by golden-section refinement, with `x₀` optimized by an
/// inner golden-section search. The objective includes the velocity misfit, which is
/// what fixes the sign of `v`.
pub fn soliton_fit(state: &SimState, model: &ModelSpec, radius: f64) -> Result<SolitonFit> {
    model.check_state(state)?;
    if model.kind != ModelKind::Phi4 {
        return Err(LabError::InvalidModel(format!("soliton fits need Phi4, got {:?}", model.kind)));
    }
    let grid = &state.grid;
    let phi = &state.field.re;
    let rate = &state.velocity.as_ref().expect("checked").re;
    let n = grid.len();
    let dx = grid.dx();
    let xs = grid.nodes();

    let (mut mass, mut moment) = (0.0, 0.0);
    for i in 1..n - 1 {
        let d = (phi[i + 1] - phi[i - 1]).abs();
        mass += d;
        moment += d * xs[i];
    }
    let no_kink = |residual: f64, norm: f64| LabError::NoKink { residual, norm };
    if mass == 0.0 {
        return Err(no_kink(f64::INFINITY, 0.0));
    }
    let centroid = moment / mass;
    let crossing = (0..n - 1)
        .filter(|&i| phi[i] == 0.0 || phi[i].signum() != phi[i + 1].signum())
        .map(|i| {
            let (a, b) = (phi[i], phi[i + 1]);
            let frac = if a == b { 0.0 } else { a / (a - b) };
            xs[i] + frac * dx
        })
        .min_by(|a, b| (a - centroid).abs().total_cmp(&(b - centroid).abs()));
    let Some(seed) = crossing else {
        return Err(no_kink(f64::INFINITY, 0.0));
    };
    let polarity = if phi[n - 1] >= phi[0] { 1.0 } else { -1.0 };

    let lo_x = (seed - radius).max(grid.x_min());
    let hi_x = (seed + radius).min(grid.x_max());
    let lo = ((lo_x - grid.x_min()) / dx).ceil() as usize;
    let hi = (((hi_x - grid.x_min()) / dx).floor() as usize).min(n - 1);
    let misfit = |v: f64, x0: f64, with_rate: bool| -> f64 {
        let mut s = 0.0;
        for i in lo..=hi {
            let e = phi[i] - polarity * kink_value(v, x0, xs[i], 0.0);
            s += e * e;
            if with_rate {
                let r = rate[i] - polarity * kink_rate(v, x0, xs[i], 0.0);
                s += r * r;
            }
        }
        s * dx
    };
    let inner = |v: f64| golden_min(seed - 1.0, seed + 1.0, 1e-10, |x0| misfit(v, x0, true));
    let steps = 40;
    let h = 2.0 * MAX_SPEED / steps as f64;
    let (mut best_v, mut best) = (0.0, f64::INFINITY);
    for k in 0..=steps {
        let v = -MAX_SPEED + k as f64 * h;
        let (_, val) = inner(v);
        if val < best {
            best = val;
            best_v = v;
        }
    }
    let (v, _) = golden_min((best_v - h).max(-MAX_SPEED), (best_v + h).min(MAX_SPEED), 1e-9, |v| inner(v).1);
    let (center, _) = inner(v);

    let mut norm = 0.0;
    for i in lo..=hi {
        norm += phi[i] * phi[i];
    }
    let norm = (norm * dx).sqrt();
    let residual = misfit(v, center, false).sqrt();
    if residual > 0.5 * norm {
        return Err(no_kink(residual, norm));
    }
    Ok(SolitonFit { velocity: v, center, polarity, residual, norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::state::Field;
    use crate::stationary::kink_profile;

    fn grid() -> Grid1D {
        Grid1D::symmetric(30.0, 0.05).unwrap()
    }

    #[test]
    fn exact_boosted_kink() {
        let m = ModelSpec::phi4();
        let k = kink_profile(&m, 0.3, 1.7, &grid()).unwrap();
        let fit = soliton_fit(&k.state(), &m, 10.0).unwrap();
        assert!((fit.velocity - 0.3).abs() < 1e-3, "{}", fit.velocity);
        assert!((fit.center - 1.7).abs() < 1e-6);
        assert!(fit.residual <= 1e-6, "{}", fit.residual);
        assert_eq!(fit.polarity, 1.0);
    }

    #[test]
    fn antikink_moving_left() {
        let m = ModelSpec::phi4();
        let k = kink_profile(&m, 0.5, -2.0, &grid()).unwrap();
        let mut s = k.state();
        s.field = s.field.scaled(-1.0);
        s.velocity = s.velocity.map(|v| v.scaled(-1.0));
        let fit = soliton_fit(&s, &m, 10.0).unwrap();
        assert_eq!(fit.polarity, -1.0);
        assert!((fit.velocity - 0.5).abs() < 1e-3);
        let k = kink_profile(&m, -0.4, 0.0, &grid()).unwrap();
        assert!((soliton_fit(&k.state(), &m, 10.0).unwrap().velocity + 0.4).abs() < 1e-3);
    }

    #[test]
    fn vacuum_has_no_kink() {
        let g = grid();
        let s = SimState::new(g, Field::from_real(vec![1.0; g.len()]), Some(Field::zeros(g.len()))).unwrap();
        assert!(matches!(soliton_fit(&s, &ModelSpec::phi4(), 10.0), Err(LabError::NoKink { .. })));
        let s = SimState::new(g, Field::from_real_fn(&g, |x| 1.0 + 0.1 * (-x * x).exp()), Some(Field::zeros(g.len())))
            .unwrap();
        assert!(matches!(soliton_fit(&s, &ModelSpec::phi4(), 10.0), Err(LabError::NoKink { .. })));
    }

    #[test]
    fn kink_with_ripple() {
        let m = ModelSpec::phi4();
        let g = grid();
        let k = kink_profile(&m, 0.3, 0.0, &g).unwrap();
        let mut s = k.state();
        let ripple = Field::from_real_fn(&g, |x| 0.01 * (3.0 * x).sin() * (-(x - 6.0).powi(2) / 4.0).exp());
        let dripple = Field::from_real_fn(&g, |x| {
            -0.01 * 3.0 * (3.0 * x).cos() * (-(x - 6.0).powi(2) / 4.0).exp()
                + 0.01 * (3.0 * x).sin() * (x - 6.0) / 2.0 * (-(x - 6.0).powi(2) / 4.0).exp()
        });
        s.field = s.field.add(&ripple);
        s.velocity = s.velocity.map(|v| v.add(&dripple));
        let fit = soliton_fit(&s, &m, 10.0).unwrap();
        assert!((fit.velocity - 0.3).abs() < 5e-3, "{}", fit.velocity);
    }
}
