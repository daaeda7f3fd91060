use attractorlab_core::quasiclassics::gauge_phase;
use attractorlab_core::{Complex64, ReportEnvelope};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, DiffractConfig, Experiment, GunSection};
use crate::config::{self, ensure, ConfigResult};
use crate::output::Artifacts;

/// Gun followed by diffraction of the emitted de Broglie wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub gun: GunSection,
    pub diffraction: DiffractConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        // Φ* = 200 accelerates the electron to k = 20.
        Self { gun: GunSection::with_phi_star(200.0), diffraction: DiffractConfig::default() }
    }
}

pub(super) struct Pipeline {
    config: PipelineConfig,
    seed: u64,
}

/// Fills keys missing from a given `gun` section with the pipeline defaults rather than the
/// stand-alone gun defaults. Nested values such as `potential` are replaced whole.
fn with_gun_defaults(doc: &Value) -> Value {
    let mut doc = doc.clone();
    if let Some(Value::Object(gun)) = doc.get_mut("gun") {
        let defaults = serde_json::to_value(GunSection::with_phi_star(200.0)).expect("serializable");
        if let Value::Object(defaults) = defaults {
            for (k, v) in defaults {
                gun.entry(k).or_insert(v);
            }
        }
    }
    doc
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<Pipeline> {
    let mut c: PipelineConfig = config::parse(&with_gun_defaults(doc))?;
    c.gun = c.gun.resolve("gun.")?;
    ensure(c.diffraction.k.is_none(), "diffraction.k", "set by the gun in a pipeline")?;
    ensure(c.diffraction.a_in.is_none(), "diffraction.a_in", "set by the gun in a pipeline")?;
    c.diffraction.validate("diffraction.")?;
    Ok(Pipeline { config: c, seed })
}

impl Experiment for Pipeline {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let c = &self.config;
        let mut gun_env = ReportEnvelope::default();
        let (wave, trajectory, ray_plot) = c.gun.evaluate(&mut gun_env)?;
        let aperture = c.gun.aperture.expect("resolved");
        let a_in = Complex64::from_polar(1.0, gauge_phase(&wave, aperture, 0.0));
        let mut diff_env = ReportEnvelope::default();
        let (mut fringe, fringe_plot) = c.diffraction.evaluate(wave.k_norm, a_in, &mut diff_env)?;
        let mut env = ReportEnvelope::new(echo(Command::Pipeline, self.seed, c));
        env.absorb("gun", gun_env);
        env.absorb("diffraction", diff_env);
        let mut trajectory = trajectory;
        trajectory.name = "gun.trajectory".into();
        fringe.name = "diffraction.fringe".into();
        Ok(Artifacts {
            report: env,
            tables: vec![trajectory, fringe],
            plots: vec![("gun.trajectory".into(), ray_plot), ("diffraction.fringe".into(), fringe_plot)],
        })
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn default_pipeline_reaches_k20_and_passes() {
        let out = prepare(&json!({}), 0).unwrap().run().unwrap();
        let m = &out.report.metrics;
        assert!((m["gun.k"] - 20.0).abs() < 1e-6, "{m:?}");
        assert!((m["diffraction.k"] - m["gun.k"]).abs() == 0.0);
        assert!(out.report.all_passed(), "{:?}", out.report.failed());
        out.report.validate().unwrap();
    }

    #[test]
    fn wave_number_cannot_be_overridden() {
        let doc = json!({"diffraction": {"k": 3.0}});
        assert_eq!(prepare(&doc, 0).err().unwrap().key, "diffraction.k");
    }

    #[test]
    fn partial_gun_section_keeps_pipeline_potential() {
        let p = prepare(&json!({"gun": {"anode": 1.0}}), 0).unwrap();
        assert_eq!(p.config.gun.potential, GunSection::with_phi_star(200.0).potential);
    }
}
