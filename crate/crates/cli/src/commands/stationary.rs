use attractorlab_core::stationary::{amplitude_slope, solve_stationary_orbit, solve_stationary_orbits};
use attractorlab_core::{Grid1D, ModelSpec, NonlinearitySpec, ReportEnvelope};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, Experiment};
use crate::config::{self, ensure, positive, ConfigError, ConfigResult};
use crate::output::{Artifacts, Table};
use crate::plot::LinePlot;

/// Stationary orbit `ψ_ω(x) e^{−iωt}` of the U(1) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryConfig {
    pub mass: f64,
    /// Coefficients of `a(s)`, lowest degree first.
    pub nonlinearity: Vec<f64>,
    pub omega: f64,
    pub half_width: f64,
    pub dx: f64,
    pub residual_tolerance: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            nonlinearity: NonlinearitySpec::cubic_focusing().coefficients,
            omega: 0.6,
            half_width: 20.0,
            dx: 0.05,
            residual_tolerance: 1e-8,
        }
    }
}

const JUMP_TOLERANCE: f64 = 1e-10;

pub(super) struct Stationary {
    config: StationaryConfig,
    seed: u64,
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<Stationary> {
    let c: StationaryConfig = config::parse(doc)?;
    positive(c.mass, "mass")?;
    ensure(c.omega.abs() < c.mass, "omega", format!("|omega| must be below mass = {}", c.mass))?;
    positive(c.half_width, "half_width")?;
    positive(c.dx, "dx")?;
    ensure(c.half_width >= 2.0 * c.dx, "half_width", "must span at least two cells")?;
    positive(c.residual_tolerance, "residual_tolerance")?;
    ModelSpec::kgu1(c.mass, NonlinearitySpec::u1(c.nonlinearity.clone()))
        .validate()
        .map_err(|e| ConfigError::new("nonlinearity", e))?;
    Ok(Stationary { config: c, seed })
}

impl Experiment for Stationary {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let c = &self.config;
        let model = ModelSpec::kgu1(c.mass, NonlinearitySpec::u1(c.nonlinearity.clone()));
        let grid = Grid1D::symmetric(c.half_width, c.dx)?;
        let orbit = solve_stationary_orbit(&model, c.omega, &grid)?;
        let branches = solve_stationary_orbits(&model, c.omega, &grid)?.len();
        let origin = grid.origin().expect("symmetric grids contain the origin");

        let mut env = ReportEnvelope::new(echo(Command::Stationary, self.seed, c));
        env.metric("omega", orbit.omega)
            .metric("kappa", orbit.kappa)
            .metric("amplitude", orbit.amplitude)
            .metric("profile_at_origin", orbit.profile[origin])
            .metric("jump_residual", orbit.jump_residual(&model))
            .metric("discrete_residual", orbit.discrete_residual(&model, 0.0))
            .metric("branches", branches as f64);
        if let Ok(slope) = amplitude_slope(&model, c.omega, orbit.amplitude) {
            env.metric("amplitude_slope", slope);
        }
        env.check_at_most("discrete_equation", "discrete_residual", c.residual_tolerance)?;
        env.check_at_most("jump_condition", "jump_residual", JUMP_TOLERANCE)?;

        let continuum = orbit.continuum_profile();
        let mut table = Table::new("profile", &["x", "value_re", "value_im", "continuum"]);
        let nodes = grid.nodes();
        for ((x, p), q) in nodes.iter().zip(&orbit.profile).zip(&continuum) {
            table.push_nums(&[*x, *p, 0.0, *q]);
        }
        let plot = LinePlot::new(&format!("Stationary orbit, omega = {}", c.omega), "x", "psi")
            .with("discrete", nodes.iter().copied().zip(orbit.profile.iter().copied()).collect())
            .with("C exp(-kappa|x|)", nodes.iter().copied().zip(continuum).collect());
        Ok(Artifacts { report: env, tables: vec![table], plots: vec![("profile".into(), plot)] })
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn default_orbit_matches_closed_form() {
        let out = prepare(&json!({}), 0).unwrap().run().unwrap();
        let m = &out.report.metrics;
        assert!((m["amplitude"] - 1.6f64.sqrt()).abs() < 1e-10);
        assert!((m["kappa"] - 0.8).abs() < 1e-15);
        assert!(out.report.all_passed());
        let row = out.tables[0].rows.iter().find(|r| r[0].parse::<f64>().unwrap().abs() < 1e-12).unwrap();
        assert!((row[3].parse::<f64>().unwrap() - 1.264911).abs() < 1e-6);
        // The lattice solution sits O(dx²) above the continuum trace value.
        assert!((row[1].parse::<f64>().unwrap() - 1.264911).abs() < 2e-4);
    }

    #[test]
    fn omega_outside_gap_is_config_error() {
        assert_eq!(prepare(&json!({"omega": 1.2}), 0).err().unwrap().key, "omega");
    }
}
