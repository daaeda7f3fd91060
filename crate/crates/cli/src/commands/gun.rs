use attractorlab_core::quasiclassics::{
    action_gradient_check, de_broglie_check, trace_ray, DeBroglie, GunConfig, GunPotential, Vec3,
};
use attractorlab_core::{PhysConstants, ReportEnvelope, TraceSeries};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, Experiment};
use crate::config::{self, ensure, positive, ConfigError, ConfigResult};
use crate::output::{Artifacts, Table};
use crate::plot::LinePlot;

/// Electron gun and ray-tracing settings. Times left unset are derived from the
/// uniform-acceleration transit time to the anode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GunSection {
    pub potential: GunPotential,
    pub anode: f64,
    /// Aperture point on the anode; defaults to the axis.
    pub aperture: Option<Vec3>,
    pub emission_spread: f64,
    pub dt: f64,
    pub constants: PhysConstants,
    pub t_final: Option<f64>,
    /// Time at which the action gradient is compared with the momentum.
    pub gradient_time: Option<f64>,
    pub gradient_spread: f64,
    pub gap_tolerance: f64,
    pub gradient_tolerance: f64,
}

impl Default for GunSection {
    fn default() -> Self {
        Self::with_phi_star(0.5)
    }
}

impl GunSection {
    pub fn with_phi_star(phi_star: f64) -> Self {
        Self {
            potential: GunPotential::LinearRamp { phi_star },
            anode: 1.0,
            aperture: None,
            emission_spread: 0.0,
            dt: 1e-3,
            constants: PhysConstants::default(),
            t_final: None,
            gradient_time: None,
            gradient_spread: 1e-3,
            gap_tolerance: 1e-8,
            gradient_tolerance: 1e-4,
        }
    }

    pub fn gun(&self) -> GunConfig {
        GunConfig {
            potential: self.potential.clone(),
            anode: self.anode,
            aperture: self.aperture.unwrap_or([0.0, 0.0, self.anode]),
            emission_spread: self.emission_spread,
            dt: self.dt,
            constants: self.constants,
        }
    }

    /// Fills the derived times; `prefix` is prepended to reported keys.
    pub fn resolve(mut self, prefix: &str) -> ConfigResult<Self> {
        let key = |k: &str| format!("{prefix}{k}");
        positive(self.anode, &key("anode"))?;
        positive(self.dt, &key("dt"))?;
        positive(self.gradient_spread, &key("gradient_spread"))?;
        positive(self.gap_tolerance, &key("gap_tolerance"))?;
        positive(self.gradient_tolerance, &key("gradient_tolerance"))?;
        self.aperture.get_or_insert([0.0, 0.0, self.anode]);
        let gun = self.gun();
        gun.validate().map_err(|e| ConfigError::new(key("potential"), e))?;
        let phi = gun.phi_star().map_err(|e| ConfigError::new(key("aperture"), e))?;
        let c = &gun.constants;
        let accel = -c.charge * phi / (self.anode * c.mass);
        if self.t_final.is_none() {
            ensure(accel > 0.0, &key("t_final"), "required when the potential does not accelerate the electron")?;
        }
        let transit = (2.0 * self.anode / accel).sqrt();
        let t_final = *self.t_final.get_or_insert(1.5 * transit);
        positive(t_final, &key("t_final"))?;
        let t_grad = *self.gradient_time.get_or_insert(1.25 * transit.min(t_final / 1.25));
        ensure(
            t_grad > 0.0 && t_grad <= t_final,
            &key("gradient_time"),
            format!("must lie in (0, t_final = {t_final}]"),
        )?;
        Ok(self)
    }

    /// Ray tracing, de Broglie wave and action-gradient metrics.
    pub fn evaluate(&self, env: &mut ReportEnvelope) -> anyhow::Result<(DeBroglie, Table, LinePlot)> {
        let gun = self.gun();
        let start = gun.emission_start();
        let traj = trace_ray(&gun, start, self.t_final.expect("resolved"))?;
        let wave = de_broglie_check(&traj, &gun.constants)?;
        let grad = action_gradient_check(&gun, start, self.gradient_time.expect("resolved"), self.gradient_spread)?;
        env.metric("k", wave.k_norm)
            .metric("k1", wave.k[0])
            .metric("k2", wave.k[1])
            .metric("k3", wave.k[2])
            .metric("omega", wave.omega)
            .metric("dispersion_gap", wave.dispersion_gap)
            .metric("hamiltonian_drift", traj.hamiltonian_drift())
            .metric("final_action", traj.final_action())
            .metric("action_gradient_error", grad.relative_error)
            .metric("action_time_derivative", grad.time_derivative);
        if let Some(t) = traj.anode_time {
            env.metric("anode_time", t);
        }
        env.check_at_most("dispersion_relation", "dispersion_gap", self.gap_tolerance)?;
        env.check_at_most("action_gradient", "action_gradient_error", self.gradient_tolerance)?;
        env.series("action", TraceSeries::from_real(traj.times.clone(), &traj.action)?);

        let mut table = Table::new("trajectory", &["t", "x1", "x2", "x3", "p1", "p2", "p3", "action", "hamiltonian"]);
        for i in 0..traj.times.len() {
            let (x, p) = (traj.positions[i], traj.momenta[i]);
            table.push_nums(&[traj.times[i], x[0], x[1], x[2], p[0], p[1], p[2], traj.action[i], traj.hamiltonian[i]]);
        }
        let pick =
            |f: &dyn Fn(usize) -> f64| traj.times.iter().enumerate().map(|(i, t)| (*t, f(i))).collect::<Vec<_>>();
        let plot = LinePlot::new("Electron ray", "t", "x3, p3")
            .with("x3", pick(&|i| traj.positions[i][2]))
            .with("p3", pick(&|i| traj.momenta[i][2]));
        Ok((wave, table, plot))
    }
}

pub(super) struct Gun {
    config: GunSection,
    seed: u64,
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<Gun> {
    let config = config::parse::<GunSection>(doc)?.resolve("")?;
    Ok(Gun { config, seed })
}

impl Experiment for Gun {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let mut env = ReportEnvelope::new(echo(Command::Gun, self.seed, &self.config));
        let (_, table, plot) = self.config.evaluate(&mut env)?;
        Ok(Artifacts { report: env, tables: vec![table], plots: vec![("trajectory".into(), plot)] })
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn default_ramp_gives_unit_wave_number() {
        let out = prepare(&json!({}), 0).unwrap().run().unwrap();
        let m = &out.report.metrics;
        assert!((m["k"] - 1.0).abs() < 1e-8);
        assert!((m["omega"] - 0.5).abs() < 1e-12);
        assert!(m["dispersion_gap"] <= 1e-8);
        assert!(out.report.all_passed(), "{:?}", out.report.failed());
        assert_eq!(out.report.config_echo["t_final"], json!(3.0));
    }

    #[test]
    fn decelerating_ramp_needs_explicit_time() {
        let doc = json!({"potential": {"kind": "linear_ramp", "phi_star": -0.5}});
        assert_eq!(prepare(&doc, 0).err().unwrap().key, "t_final");
    }

    #[test]
    fn unknown_potential_kind_names_key() {
        let doc = json!({"potential": {"kind": "spiral"}});
        assert_eq!(prepare(&doc, 0).err().unwrap().key, "potential.kind");
    }
}
