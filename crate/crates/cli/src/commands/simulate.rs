use attractorlab_core::diagnostics::attraction::{
    kgu1_attraction, lamb_attraction, phi4_kink_run, KinkRunParams, OrbitRunParams, RunParams,
};
use attractorlab_core::diagnostics::spectrum::trailing_spectrum;
use attractorlab_core::initial::RandomData;
use attractorlab_core::{ModelSpec, NonlinearitySpec, TraceSeries};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, Experiment};
use crate::config::{self, ensure, positive, ConfigError, ConfigResult};
use crate::output::{Artifacts, Table};
use crate::plot::LinePlot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    LambString,
    Kgu1,
    Phi4,
}

/// Attraction run. Unset options take per-model defaults when the config is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelChoice,
    pub mass: Option<f64>,
    /// Polynomial coefficients of `F` (string) or `a` (U(1) model), lowest degree first.
    pub nonlinearity: Option<Vec<f64>>,
    pub dx: f64,
    pub dt: f64,
    pub t_final: Option<f64>,
    pub radius: f64,
    pub margin: f64,
    pub sample_every: f64,
    pub data: Option<RandomData>,
    pub orbit: OrbitRunParams,
    pub kink: KinkRunParams,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Kgu1,
            mass: None,
            nonlinearity: None,
            dx: 0.05,
            dt: 0.025,
            t_final: None,
            radius: 5.0,
            margin: 1.0,
            sample_every: 1.0,
            data: None,
            orbit: OrbitRunParams::default(),
            kink: KinkRunParams::default(),
        }
    }
}

impl SimulateConfig {
    fn resolve(mut self) -> ConfigResult<Self> {
        let m = self.model;
        if m == ModelChoice::Phi4 {
            ensure(self.nonlinearity.is_none(), "nonlinearity", "the phi4 potential is fixed")?;
            ensure(self.data.is_none(), "data", "phi4 runs start from a kink; use `kink`")?;
        }
        if m != ModelChoice::Kgu1 {
            ensure(self.mass.is_none(), "mass", "only the kgu1 model has a mass")?;
        }
        self.mass.get_or_insert(if m == ModelChoice::Kgu1 { 1.0 } else { 0.0 });
        self.t_final.get_or_insert(if m == ModelChoice::Kgu1 { 200.0 } else { 100.0 });
        if m != ModelChoice::Phi4 {
            self.nonlinearity.get_or_insert_with(|| match m {
                ModelChoice::Kgu1 => NonlinearitySpec::confining().coefficients,
                _ => NonlinearitySpec::bistable().coefficients,
            });
            self.data.get_or_insert_with(|| match m {
                ModelChoice::Kgu1 => RandomData { energy: 64.0, complex: true, ..Default::default() },
                _ => RandomData::default(),
            });
        }
        positive(self.dx, "dx")?;
        positive(self.dt, "dt")?;
        positive(self.t_final.unwrap_or_default(), "t_final")?;
        positive(self.radius, "radius")?;
        ensure(self.margin >= 0.0, "margin", "must be non-negative")?;
        positive(self.sample_every, "sample_every")?;
        let k = (self.sample_every / self.dt).round();
        ensure(
            k >= 1.0 && (k * self.dt - self.sample_every).abs() <= 1e-9 * self.sample_every,
            "sample_every",
            format!("must be a multiple of dt = {}", self.dt),
        )?;
        if let Some(d) = &self.data {
            d.validate().map_err(|e| ConfigError::new("data", e))?;
            ensure(!d.complex || m == ModelChoice::Kgu1, "data.complex", "complex data need the kgu1 model")?;
        }
        if m == ModelChoice::Kgu1 {
            positive(self.mass.unwrap_or_default(), "mass")?;
            positive(self.orbit.spectral_window, "orbit.spectral_window")?;
            ensure(self.orbit.omega_samples >= 2, "orbit.omega_samples", "must be at least 2")?;
        }
        if m == ModelChoice::Phi4 {
            ensure(self.kink.velocity.abs() < 1.0, "kink.velocity", "must be below the speed of light")?;
            positive(self.kink.window, "kink.window")?;
            positive(self.kink.perturbation_width, "kink.perturbation_width")?;
        }
        self.model_spec().validate().map_err(|e| ConfigError::new("nonlinearity", e))?;
        Ok(self)
    }

    fn model_spec(&self) -> ModelSpec {
        let coeffs = self.nonlinearity.clone().unwrap_or_default();
        match self.model {
            ModelChoice::LambString => ModelSpec::lamb_string(NonlinearitySpec::real(coeffs)),
            ModelChoice::Kgu1 => ModelSpec::kgu1(self.mass.unwrap_or(1.0), NonlinearitySpec::u1(coeffs)),
            ModelChoice::Phi4 => ModelSpec::phi4(),
        }
    }

    fn run_params(&self) -> RunParams {
        RunParams {
            dx: self.dx,
            dt: self.dt,
            t_final: self.t_final.unwrap_or_default(),
            radius: self.radius,
            margin: self.margin,
            sample_every: self.sample_every,
        }
    }
}

pub(super) struct Simulate {
    config: SimulateConfig,
    seed: u64,
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<Simulate> {
    let config = config::parse::<SimulateConfig>(doc)?.resolve()?;
    Ok(Simulate { config, seed })
}

fn real_points(series: &TraceSeries) -> Vec<(f64, f64)> {
    series.times.iter().zip(&series.values).map(|(t, z)| (*t, z.norm())).collect()
}

impl Experiment for Simulate {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let c = &self.config;
        let model = c.model_spec();
        let params = c.run_params();
        let data = c.data.clone().unwrap_or_default();
        let report = match c.model {
            ModelChoice::LambString => lamb_attraction(&model, &params, &data, self.seed)?,
            ModelChoice::Kgu1 => kgu1_attraction(&model, &params, &c.orbit, &data, self.seed)?,
            ModelChoice::Phi4 => phi4_kink_run(&model, &params, &c.kink)?,
        };
        let mut out =
            Artifacts { report: report.envelope(echo(Command::Simulate, self.seed, c))?, ..Default::default() };

        let mut decay = LinePlot::new("Local seminorm decay", "t", "seminorm").log_y();
        let label = if c.model == ModelChoice::Phi4 { "comoving misfit" } else { "local energy" };
        decay = decay.with(label, real_points(&report.local_seminorm_series));
        if let Some(d) = &report.manifold_distance_series {
            decay = decay.with("distance to solitary manifold", real_points(d));
        }
        out.plots.push(("seminorm".into(), decay));

        if c.model == ModelChoice::Kgu1 {
            let spec = trailing_spectrum(&report.trace, c.orbit.spectral_window, false)?;
            let mut bins: Vec<(f64, f64)> = spec.omegas.iter().copied().zip(spec.power.iter().copied()).collect();
            bins.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = spec.power.iter().sum();
            let mut table = Table::new("spectrum", &["omega", "power"]);
            for &(w, p) in &bins {
                table.push_nums(&[w, p]);
            }
            out.tables.push(table);
            let norm = if total > 0.0 { total } else { 1.0 };
            let shown = bins.iter().filter(|b| b.0.abs() <= 2.0 * model.mass).map(|&(w, p)| (w, p / norm)).collect();
            out.plots.push((
                "spectrum".into(),
                LinePlot::new("Trace spectrum", "omega", "relative power").log_y().with("trace", shown),
            ));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn defaults_depend_on_model() {
        let kg = prepare(&json!({}), 0).unwrap().config;
        assert_eq!(kg.t_final, Some(200.0));
        assert_eq!(kg.nonlinearity, Some(vec![2.0, -1.0]));
        assert!(kg.data.unwrap().complex);
        let lamb = prepare(&json!({"model": "lamb_string"}), 0).unwrap().config;
        assert_eq!(lamb.mass, Some(0.0));
        assert_eq!(lamb.nonlinearity, Some(vec![0.0, 1.0, 0.0, -1.0]));
        let phi4 = prepare(&json!({"model": "phi4"}), 0).unwrap().config;
        assert!(phi4.data.is_none());
    }

    #[test]
    fn invalid_values_name_their_key() {
        let key = |doc: Value| prepare(&doc, 0).err().unwrap().key;
        assert_eq!(key(json!({"dt": -1.0})), "dt");
        assert_eq!(key(json!({"sample_every": 0.03})), "sample_every");
        assert_eq!(key(json!({"model": "phi4", "mass": 1.0})), "mass");
        assert_eq!(key(json!({"data": {"energy": -1.0}})), "data");
        assert_eq!(key(json!({"orbit": {"spectral_window": "x"}})), "orbit.spectral_window");
        assert_eq!(key(json!({"model": "lamb_string", "data": {"complex": true}})), "data.complex");
    }

    #[test]
    fn short_lamb_run_produces_plots() {
        let doc = json!({"model": "lamb_string", "t_final": 20.0});
        let out = prepare(&doc, 1).unwrap().run().unwrap();
        assert!(out.report.metrics.contains_key("energy_drift"));
        assert!(out.report.series.contains_key("trace"));
        assert_eq!(out.plots.len(), 1);
        assert_eq!(out.report.config_echo["seed"], json!(1));
        assert_eq!(out.report.config_echo["dx"], json!(0.05));
    }
}
