//! Discrete Hamiltonians.
//!
//! Nodal terms use trapezoid weights; the gradient term is the sum over grid edges of
//! `|ψ_{i+1} − ψ_i|²/(2dx)`, i.e. the centered difference at half nodes. This is the
//! quantity the leapfrog scheme conserves exactly in the semi-discrete limit.

use crate::error::{LabError, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::state::SimState;

/// Total discrete energy of `state` under `model`.
pub fn discrete_energy(state: &SimState, model: &ModelSpec) -> Result<f64> {
    model.check_state(state)?;
    Ok(window_energy(state, model, 0, state.grid.len() - 1))
}

/// Energy contained in `|x| ≤ radius`; `±radius` must be grid nodes.
pub fn local_energy(state: &SimState, model: &ModelSpec, radius: f64) -> Result<f64> {
    model.check_state(state)?;
    let (lo, hi) = window_nodes(state, radius)?;
    Ok(window_energy(state, model, lo, hi))
}

pub(crate) fn window_nodes(state: &SimState, radius: f64) -> Result<(usize, usize)> {
    let g = &state.grid;
    match (g.node_index(-radius), g.node_index(radius)) {
        (Some(lo), Some(hi)) if lo < hi => Ok((lo, hi)),
        _ => Err(LabError::InvalidArgument(format!("±{radius} are not grid nodes"))),
    }
}

/// Energy over nodes `lo..=hi` with half weights at both ends.
pub(crate) fn window_energy(state: &SimState, model: &ModelSpec, lo: usize, hi: usize) -> f64 {
    let dx = state.grid.dx();
    let f = &state.field;
    let weight = |i: usize| if i == lo || i == hi { 0.5 * dx } else { dx };

    let (grad_coef, mass2) = match model.kind {
        ModelKind::LinearSchrodinger => {
            let c = &model.constants;
            (c.hbar * c.hbar / (2.0 * c.mass), 0.0)
        }
        _ => (0.5, model.mass * model.mass),
    };

    let mut grad = 0.0;
    for i in lo..hi {
        let dr = f.re[i + 1] - f.re[i];
        let di = f.im[i + 1] - f.im[i];
        grad += dr * dr + di * di;
    }
    let mut total = grad_coef * grad / dx;

    let mut nodal = 0.0;
    match model.kind {
        ModelKind::LinearSchrodinger => {
            let v = model.potential.as_deref().unwrap_or(&[]);
            for i in lo..=hi {
                nodal += weight(i) * v[i] * f.get(i).norm_sqr();
            }
        }
        kind => {
            let vel = state.velocity.as_ref().expect("checked by check_state");
            let level = if kind == ModelKind::Phi4 { model.vacuum_level() } else { 0.0 };
            for i in lo..=hi {
                let z = f.get(i);
                let mut e = 0.5 * vel.get(i).norm_sqr() + 0.5 * mass2 * z.norm_sqr();
                if kind == ModelKind::Phi4 {
                    e += model.nonlinearity.potential(z) - level;
                }
                nodal += weight(i) * e;
            }
        }
    }
    total += nodal;

    if model.kind.is_concentrated() {
        if let Some(o) = state.grid.origin() {
            if lo <= o && o <= hi {
                total += model.nonlinearity.potential(f.get(o));
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::models::NonlinearitySpec;
    use crate::state::Field;

    fn at_rest(grid: Grid1D, field: Field) -> SimState {
        SimState::new(grid, field, Some(Field::zeros(grid.len()))).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = Grid1D::symmetric(3.0, 0.1).unwrap();
        for m in
            [ModelSpec::lamb_string(NonlinearitySpec::bistable()), ModelSpec::kgu1(1.0, NonlinearitySpec::confining())]
        {
            assert_eq!(discrete_energy(&SimState::zero(g, true), &m).unwrap(), 0.0);
        }
        let v = crate::models::double_well_potential(&g, 2.0, 1.0, 1.0);
        let m = ModelSpec::linear_schrodinger(v, Default::default());
        assert_eq!(discrete_energy(&SimState::zero(g, false), &m).unwrap(), 0.0);
    }

    #[test]
    fn sine_gradient_energy() {
        let g = Grid1D::new(-1.0, 1.0, 4001).unwrap();
        let s = at_rest(g, Field::from_real_fn(&g, |x| (std::f64::consts::PI * x).sin()));
        let m = ModelSpec::lamb_string(NonlinearitySpec::real(vec![]));
        let e = discrete_energy(&s, &m).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 2.0;
        assert!((e - exact).abs() < 1e-4, "{e}");
    }

    #[test]
    fn second_order_convergence() {
        let exact = std::f64::consts::PI.powi(2) / 2.0;
        let m = ModelSpec::lamb_string(NonlinearitySpec::real(vec![]));
        let err = |n: usize| {
            let g = Grid1D::new(-1.0, 1.0, n).unwrap();
            let s = at_rest(g, Field::from_real_fn(&g, |x| (std::f64::consts::PI * x).sin()));
            (discrete_energy(&s, &m).unwrap() - exact).abs()
        };
        let ratio = err(101) / err(201);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn kink_energy() {
        let g = Grid1D::symmetric(40.0, 0.005).unwrap();
        let s = at_rest(g, Field::from_real_fn(&g, |x| (x / 2f64.sqrt()).tanh()));
        let e = discrete_energy(&s, &ModelSpec::phi4()).unwrap();
        assert!((e - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-6, "{e}");
    }

    #[test]
    fn phase_invariance() {
        let g = Grid1D::symmetric(5.0, 0.05).unwrap();
        let m = ModelSpec::kgu1(1.0, NonlinearitySpec::cubic_focusing());
        let f = Field::from_fn(&g, |x| num_complex::Complex64::new((-x * x).exp(), 0.3 * x * (-x.abs()).exp()));
        let v = Field::from_fn(&g, |x| num_complex::Complex64::new(0.2 * x.cos(), -0.1) * (-x * x).exp());
        let s = SimState::new(g, f, Some(v)).unwrap();
        let e0 = discrete_energy(&s, &m).unwrap();
        for theta in [0.3, 1.7, 4.0] {
            let e = discrete_energy(&s.rotated(theta), &m).unwrap();
            assert!((e - e0).abs() < 1e-13 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn local_energy_splits_total() {
        let g = Grid1D::symmetric(6.0, 0.05).unwrap();
        let m = ModelSpec::lamb_string(NonlinearitySpec::bistable());
        let s = at_rest(g, Field::from_real_fn(&g, |x| 0.4 * (-(x - 2.0).powi(2)).exp()));
        let inner = local_energy(&s, &m, 3.0).unwrap();
        let total = discrete_energy(&s, &m).unwrap();
        assert!(inner <= total + 1e-15 && inner > 0.0);
        assert!(local_energy(&s, &m, 3.01).is_err());
    }
}
