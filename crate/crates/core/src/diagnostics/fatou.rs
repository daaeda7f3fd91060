//! Energy of the limit object versus the initial energy.

use serde::{Deserialize, Serialize};

use crate::energy::discrete_energy;
use crate::error::{LabError, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::state::{Field, SimState};
use crate::stationary::{kink_profile, StationaryOrbit};

/// Largest admissible Fatou gap.
pub const FATOU_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LimitObject {
    /// Constant stationary state of the string.
    Constant(f64),
    /// `e^{iθ}ψ_ω` of the U(1) model.
    Orbit { orbit: StationaryOrbit, theta: f64 },
    /// Boosted φ⁴ kink.
    Kink { velocity: f64, center: f64 },
}

/// Energy of the limit object on the grid of `like`.
pub fn limit_energy(limit: &LimitObject, like: &SimState, model: &ModelSpec) -> Result<f64> {
    let grid = like.grid;
    let state = match (limit, model.kind) {
        (LimitObject::Constant(c), ModelKind::LambString) => {
            SimState::new(grid, Field::from_real(vec![*c; grid.len()]), Some(Field::zeros(grid.len())))?
        }
        (LimitObject::Orbit { orbit, theta }, ModelKind::KGU1) => {
            if orbit.grid != grid {
                return Err(LabError::GridMismatch { expected: grid.len(), found: orbit.grid.len() });
            }
            orbit.state(*theta)
        }
        (LimitObject::Kink { velocity, center }, ModelKind::Phi4) => {
            kink_profile(model, *velocity, *center, &grid)?.state()
        }
        (limit, kind) => {
            return Err(LabError::InvalidArgument(format!("limit {limit:?} does not belong to {kind:?}")));
        }
    };
    discrete_energy(&state, model)
}

/// `H(limit) − H(initial)`; non-positive up to [`FATOU_TOL`] for a correct limit.
pub fn fatou_check(initial: &SimState, limit: &LimitObject, model: &ModelSpec) -> Result<f64> {
    Ok(limit_energy(limit, initial, model)? - discrete_energy(initial, model)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::models::NonlinearitySpec;
    use crate::stationary::solve_stationary_orbit;

    #[test]
    fn exact_stationary_states() {
        let g = Grid1D::symmetric(20.0, 0.05).unwrap();
        let m = ModelSpec::kgu1(1.0, NonlinearitySpec::cubic_focusing());
        let o = solve_stationary_orbit(&m, 0.6, &g).unwrap();
        let gap = fatou_check(&o.state(0.3), &LimitObject::Orbit { orbit: o.clone(), theta: 1.0 }, &m).unwrap();
        assert!(gap.abs() < 1e-8);

        let lamb = ModelSpec::lamb_string(NonlinearitySpec::bistable());
        let one = SimState::new(g, Field::from_real(vec![1.0; g.len()]), Some(Field::zeros(g.len()))).unwrap();
        assert!(fatou_check(&one, &LimitObject::Constant(1.0), &lamb).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pulse_energy_is_lost() {
        let g = Grid1D::symmetric(30.0, 0.05).unwrap();
        let lamb = ModelSpec::lamb_string(NonlinearitySpec::bistable());
        let pulse = |x: f64| 0.2 * (-(x - 10.0).powi(2)).exp();
        let s = SimState::new(g, Field::from_real_fn(&g, |x| 1.0 + pulse(x)), Some(Field::zeros(g.len()))).unwrap();
        let bare = SimState::new(g, Field::from_real_fn(&g, pulse), Some(Field::zeros(g.len()))).unwrap();
        let e_pulse = discrete_energy(&bare, &ModelSpec::lamb_string(NonlinearitySpec::real(vec![]))).unwrap();
        let gap = fatou_check(&s, &LimitObject::Constant(1.0), &lamb).unwrap();
        assert!((gap + e_pulse).abs() < 1e-3 * e_pulse);
    }

    #[test]
    fn mismatched_limit() {
        let g = Grid1D::symmetric(5.0, 0.05).unwrap();
        assert!(fatou_check(&SimState::zero(g, true), &LimitObject::Constant(1.0), &ModelSpec::phi4()).is_err());
    }
}
