//! Distance to the solitary manifold `{e^{iθ}ψ_ω}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::norms::window;
use crate::error::{LabError, Result};
use crate::state::SimState;
use crate::stationary::StationaryOrbit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldFit {
    pub distance: f64,
    /// Index into the orbit list.
    pub index: usize,
    pub omega: f64,
    pub amplitude: f64,
    pub theta: f64,
}

/// `min over orbits and θ of ‖ψ − e^{iθ}ψ_ω‖_{L²(|x|<R)}`.
///
/// The optimal phase is the argument of `⟨ψ_ω, ψ⟩`; the distance itself is evaluated
/// directly rather than through the expanded quadratic form, which cancels badly near
/// the manifold. Orbit grids must share the state's spacing and cover the window.
pub fn manifold_distance(state: &SimState, orbits: &[StationaryOrbit], radius: f64) -> Result<ManifoldFit> {
    if orbits.is_empty() {
        return Err(LabError::EmptyOrbitList);
    }
    let grid = &state.grid;
    let (lo, hi) = window(grid, 0.0, radius)?;
    let so = grid.origin().ok_or(LabError::MissingOriginNode)?;
    let dx = grid.dx();
    let weight = |i: usize| if i == lo || i == hi { 0.5 * dx } else { dx };
    let psi: Vec<Complex64> = (lo..=hi).map(|i| state.field.get(i)).collect();

    let mut best: Option<ManifoldFit> = None;
    for (index, orbit) in orbits.iter().enumerate() {
        let og = &orbit.grid;
        if (og.dx() - dx).abs() > 1e-12 * dx {
            return Err(LabError::InvalidArgument(format!(
                "orbit spacing {} differs from state spacing {dx}",
                og.dx()
            )));
        }
        let oo = og.origin().ok_or(LabError::MissingOriginNode)?;
        if oo + lo < so || oo + hi - so >= og.len() {
            return Err(LabError::InvalidArgument("orbit grid does not cover the window".into()));
        }
        let phi = &orbit.profile[oo + lo - so..=oo + hi - so];
        let inner: Complex64 = psi.iter().zip(phi).enumerate().map(|(k, (z, &p))| weight(lo + k) * p * z).sum();
        let theta = if inner.norm() > 0.0 { inner.arg() } else { 0.0 };
        let rot = Complex64::from_polar(1.0, theta);
        let d2: f64 =
            psi.iter().zip(phi).enumerate().map(|(k, (z, &p))| weight(lo + k) * (z - rot * p).norm_sqr()).sum();
        let distance = d2.sqrt();
        if best.is_none_or(|b| distance < b.distance) {
            best = Some(ManifoldFit {
                distance,
                index,
                omega: orbit.omega,
                amplitude: orbit.amplitude,
                theta: theta.rem_euclid(std::f64::consts::TAU),
            });
        }
    }
    Ok(best.expect("orbits nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::norms::{local_seminorm, NormOrder};
    use crate::grid::Grid1D;
    use crate::models::{ModelSpec, NonlinearitySpec};
    use crate::stationary::solve_stationary_orbit;

    fn orbit() -> StationaryOrbit {
        let m = ModelSpec::kgu1(1.0, NonlinearitySpec::cubic_focusing());
        solve_stationary_orbit(&m, 0.6, &Grid1D::symmetric(8.0, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn member_of_manifold() {
        let o = orbit();
        let s = o.state(1.2);
        let fit = manifold_distance(&s, std::slice::from_ref(&o), 5.0).unwrap();
        assert!(fit.distance <= 1e-12);
        assert!((fit.theta - 1.2).abs() < 1e-12);
    }

    #[test]
    fn scaled_profile() {
        let o = orbit();
        let mut s = o.state(0.0);
        s.field = s.field.scaled(1.1);
        let fit = manifold_distance(&s, std::slice::from_ref(&o), 5.0).unwrap();
        let norm = local_seminorm(&o.state(0.0), 5.0, NormOrder::L2).unwrap();
        assert!((fit.distance - 0.1 * norm).abs() < 1e-12);
    }

    #[test]
    fn zero_state_and_empty_list() {
        let o = orbit();
        let z = SimState::zero(o.grid, true);
        let fit = manifold_distance(&z, std::slice::from_ref(&o), 5.0).unwrap();
        let norm = local_seminorm(&o.state(0.0), 5.0, NormOrder::L2).unwrap();
        assert!((fit.distance - norm).abs() < 1e-14);
        assert_eq!(manifold_distance(&z, &[], 5.0), Err(LabError::EmptyOrbitList));
    }

    #[test]
    fn different_grid_extent() {
        let o = orbit();
        let big = Grid1D::symmetric(30.0, 0.05).unwrap();
        let m = ModelSpec::kgu1(1.0, NonlinearitySpec::cubic_focusing());
        let wide = solve_stationary_orbit(&m, 0.6, &big).unwrap();
        let fit = manifold_distance(&wide.state(0.5), std::slice::from_ref(&o), 5.0).unwrap();
        // The Dirichlet ends at ±8 perturb the short profile at order e^{-2κ·6}.
        assert!(fit.distance < 1e-6, "{}", fit.distance);
        assert!((fit.theta - 0.5).abs() < 1e-9);
    }
}
