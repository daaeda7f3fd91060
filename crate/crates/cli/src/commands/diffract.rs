use std::f64::consts::PI;

use attractorlab_core::diffraction::{
    born_ratio_check, current_density, fringe_geometry, kirchhoff_amplitude, ApertureSpec, ScreenSpec,
    BORN_SPREAD_LIMIT,
};
use attractorlab_core::{Complex64, LabError, PhysConstants, ReportEnvelope};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, Experiment};
use crate::config::{self, ensure, positive, ConfigError, ConfigResult};
use crate::output::{Artifacts, Table};
use crate::plot::LinePlot;

/// Diffraction of a plane wave by an aperture in the plane `x3 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffractConfig {
    pub aperture: ApertureSpec,
    /// Wave number; in a pipeline it comes from the gun instead.
    pub k: Option<f64>,
    /// Incident amplitude `[re, im]`; in a pipeline it comes from the gun instead.
    pub a_in: Option<Complex64>,
    /// Screen for the fringe pattern.
    pub screen: ScreenSpec,
    /// Screen window for the current-density and Born checks.
    pub born_screen: ScreenSpec,
    pub constants: PhysConstants,
    pub quadrature_tolerance: f64,
    pub spacing_tolerance: f64,
}

impl Default for DiffractConfig {
    fn default() -> Self {
        Self {
            aperture: ApertureSpec::TwoSlits { width: 0.5, separation: 2.0, height: 4.0 },
            k: None,
            a_in: None,
            screen: ScreenSpec::new(100.0, [25.0, 0.0], [2001, 1]),
            born_screen: ScreenSpec { paraxial_limit: Some(3.0), ..ScreenSpec::new(100.0, [2.9, 0.5], [233, 41]) },
            constants: PhysConstants::default(),
            quadrature_tolerance: 1e-6,
            spacing_tolerance: 0.02,
        }
    }
}

impl DiffractConfig {
    /// Validates everything except `k` and `a_in`.
    pub fn validate(&self, prefix: &str) -> ConfigResult<()> {
        let key = |k: &str| format!("{prefix}{k}");
        self.aperture.validate().map_err(|e| ConfigError::new(key("aperture"), e))?;
        self.screen.validate().map_err(|e| ConfigError::new(key("screen"), e))?;
        self.born_screen.validate().map_err(|e| ConfigError::new(key("born_screen"), e))?;
        self.constants.validate().map_err(|e| ConfigError::new(key("constants"), e))?;
        positive(self.quadrature_tolerance, &key("quadrature_tolerance"))?;
        positive(self.spacing_tolerance, &key("spacing_tolerance"))
    }

    /// Amplitude, fringe geometry, current density and Born checks at wave number `k`.
    pub fn evaluate(&self, k: f64, a_in: Complex64, env: &mut ReportEnvelope) -> anyhow::Result<(Table, LinePlot)> {
        let amp = kirchhoff_amplitude(&self.aperture, k, a_in, &self.screen)?;
        let window = kirchhoff_amplitude(&self.aperture, k, a_in, &self.born_screen)?;
        let current = current_density(&window, &self.constants)?;
        let born = born_ratio_check(&current, &window)?;
        env.metric("k", k)
            .metric("wavelength", 2.0 * PI / k)
            .metric("quadrature_error", amp.quadrature_error.max(window.quadrature_error))
            .metric("born_ratio_spread", born.ratio_spread)
            .metric("born_median_ratio", born.median_ratio)
            .metric("born_points", born.points as f64)
            .metric("transverse_ratio", current.max_transverse_ratio(&window))
            .metric("peak_density", amp.peak_density());
        env.check_at_most("quadrature", "quadrature_error", self.quadrature_tolerance)?;
        env.verdict("born_ratio", born.ratio_spread <= BORN_SPREAD_LIMIT, &["born_ratio_spread"])?;
        match fringe_geometry(&self.aperture, &amp) {
            Ok(g) => {
                env.metric("fringe_spacing", g.spacing)
                    .metric("expected_spacing", g.expected_spacing)
                    .metric("spacing_error", g.relative_error);
                env.check_at_most("fringe_spacing", "spacing_error", self.spacing_tolerance)?;
            }
            Err(LabError::NotTwoSlit) => env.warnings.push("fringe geometry skipped: aperture is not two slits".into()),
            Err(e) => return Err(e.into()),
        }

        let [n1, n2] = self.screen.points;
        let mut table = Table::new("fringe", &["x1", "x2", "density", "value_re", "value_im"]);
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let a = amp.get(i1, i2);
                table.push_nums(&[amp.x1[i1], amp.x2[i2], a.norm_sqr(), a.re, a.im]);
            }
        }
        let mid = amp.x2.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map_or(0, |p| p.0);
        let row = (0..n1).map(|i1| (amp.x1[i1], amp.get(i1, mid).norm_sqr())).collect();
        let plot =
            LinePlot::new(&format!("Fringes at L = {}", self.screen.distance), "x1", "|a|^2").with("density", row);
        Ok((table, plot))
    }
}

pub(super) struct Diffract {
    config: DiffractConfig,
    seed: u64,
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<Diffract> {
    let mut c: DiffractConfig = config::parse(doc)?;
    let k = *c.k.get_or_insert(20.0);
    positive(k, "k")?;
    let a = *c.a_in.get_or_insert(Complex64::new(1.0, 0.0));
    ensure(a.is_finite(), "a_in", "must be finite")?;
    c.validate("")?;
    Ok(Diffract { config: c, seed })
}

impl Experiment for Diffract {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let c = &self.config;
        let mut env = ReportEnvelope::new(echo(Command::Diffract, self.seed, c));
        let (table, plot) = c.evaluate(c.k.expect("resolved"), c.a_in.expect("resolved"), &mut env)?;
        Ok(Artifacts { report: env, tables: vec![table], plots: vec![("fringe".into(), plot)] })
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn default_two_slits_pass() {
        let out = prepare(&json!({}), 0).unwrap().run().unwrap();
        assert!(out.report.all_passed(), "{:?}", out.report.metrics);
        assert!(out.report.metrics["spacing_error"] <= 0.02);
        assert_eq!(out.tables[0].rows.len(), 2001);
    }

    #[test]
    fn coarse_current_lattice_is_a_runtime_error() {
        let doc = json!({"born_screen": {"distance": 100.0, "half_width": [2.9, 0.5], "points": [11, 3], "paraxial_limit": 3.0}});
        assert!(prepare(&doc, 0).unwrap().run().is_err());
    }

    #[test]
    fn bad_aperture_names_key() {
        let doc = json!({"aperture": {"shape": "two_slits", "width": 3.0, "separation": 2.0, "height": 1.0}});
        assert_eq!(prepare(&doc, 0).err().unwrap().key, "aperture");
        let doc = json!({"aperture": {"shape": "two_slits", "width": 0.5}});
        assert_eq!(prepare(&doc, 0).err().unwrap().key, "aperture");
    }
}
