use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::Context;
use attractorlab_core::diagnostics::beats::{beat_spectrum, bound_states};
use attractorlab_core::diagnostics::spectrum::{dominant_frequency, trailing_spectrum, Spectrum};
use attractorlab_core::models::double_well_potential;
use attractorlab_core::{Complex64, Grid1D, ModelSpec, PhysConstants, ReportEnvelope, SimState, TraceSeries};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, Command, Experiment};
use crate::config::{self, ensure, positive, ConfigError, ConfigResult};
use crate::output::{Artifacts, Table};
use crate::plot::LinePlot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Probability-current beats of a two-level superposition in a double well.
    Beats,
    /// A recorded trace CSV with columns `t, value_re, value_im`.
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub source: SpectrumSource,
    pub trace: Option<PathBuf>,
    /// Trailing window; defaults to the whole trace.
    pub window: Option<f64>,
    pub min_concentration: f64,
    pub depth: f64,
    pub offset: f64,
    pub width: f64,
    pub half_width: f64,
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Probe point of the current.
    pub probe: f64,
    pub constants: PhysConstants,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            source: SpectrumSource::Beats,
            trace: None,
            window: None,
            min_concentration: 0.95,
            depth: 2.0,
            offset: 2.0,
            width: 1.0,
            half_width: 15.0,
            dx: 0.05,
            dt: 0.01,
            horizon: 400.0,
            probe: 0.0,
            constants: PhysConstants::default(),
        }
    }
}

pub(super) struct SpectrumRun {
    config: SpectrumConfig,
    seed: u64,
}

pub(super) fn prepare(doc: &Value, seed: u64) -> ConfigResult<SpectrumRun> {
    let c: SpectrumConfig = config::parse(doc)?;
    match c.source {
        SpectrumSource::Trace => {
            let path = c.trace.as_ref().ok_or_else(|| ConfigError::new("trace", "required when source is `trace`"))?;
            ensure(path.is_file(), "trace", format!("{} is not a readable file", path.display()))?;
            if let Some(w) = c.window {
                positive(w, "window")?;
            }
            ensure((0.0..=1.0).contains(&c.min_concentration), "min_concentration", "must lie in [0, 1]")?;
        }
        SpectrumSource::Beats => {
            ensure(c.trace.is_none(), "trace", "only used when source is `trace`")?;
            for (v, k) in [
                (c.depth, "depth"),
                (c.width, "width"),
                (c.half_width, "half_width"),
                (c.dx, "dx"),
                (c.dt, "dt"),
                (c.horizon, "horizon"),
            ] {
                positive(v, k)?;
            }
            ensure(c.probe.abs() < c.half_width, "probe", "must lie inside the grid")?;
            c.constants.validate().map_err(|e| ConfigError::new("constants", e))?;
        }
    }
    Ok(SpectrumRun { config: c, seed })
}

pub fn read_trace(path: &std::path::Path) -> anyhow::Result<TraceSeries> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).with_context(|| format!("{} lacks a `{name}` column", path.display()))
    };
    let (ct, cr, ci) = (col("t")?, col("value_re")?, col("value_im").ok());
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| -> anyhow::Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .trim()
                .parse()
                .with_context(|| format!("{} row {}: bad number", path.display(), line + 2))
        };
        times.push(get(ct)?);
        values.push(Complex64::new(get(cr)?, ci.map(get).transpose()?.unwrap_or(0.0)));
    }
    Ok(TraceSeries::new(times, values)?)
}

/// Non-negative frequencies in ascending order, power normalized to sum one.
fn spectrum_outputs(spec: &Spectrum, max_omega: f64) -> (Table, LinePlot) {
    let mut bins: Vec<(f64, f64)> = spec.omegas.iter().copied().zip(spec.power.iter().copied()).collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = spec.power.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let mut table = Table::new("spectrum", &["omega", "power"]);
    for &(w, p) in &bins {
        table.push_nums(&[w, p]);
    }
    let shown = bins.iter().filter(|b| b.0 >= 0.0 && b.0 <= max_omega).map(|&(w, p)| (w, p / total)).collect();
    (table, LinePlot::new("Spectrum", "omega", "relative power").log_y().with("power", shown))
}

impl Experiment for SpectrumRun {
    fn run(&self) -> anyhow::Result<Artifacts> {
        let c = &self.config;
        let mut env = ReportEnvelope::new(echo(Command::Spectrum, self.seed, c));
        let (spec, max_omega) = match c.source {
            SpectrumSource::Trace => {
                let trace = read_trace(c.trace.as_deref().expect("validated"))?;
                let window = c.window.unwrap_or_else(|| trace.span());
                let est = dominant_frequency(&trace, window)?;
                env.metric("omega_estimate", est.omega)
                    .metric("spectral_concentration", est.concentration)
                    .metric("resolution", est.resolution);
                env.check_at_least("spectral_concentration", "spectral_concentration", c.min_concentration)?;
                let spec = trailing_spectrum(&trace, window, false)?;
                let top = spec.omegas.iter().fold(0.0f64, |a, w| a.max(*w));
                (spec, top)
            }
            SpectrumSource::Beats => {
                let grid = Grid1D::symmetric(c.half_width, c.dx)?;
                let model = ModelSpec::linear_schrodinger(
                    double_well_potential(&grid, c.depth, c.offset, c.width),
                    c.constants,
                );
                let states = bound_states(&model, &grid)?;
                let psi = states[0].field().add(&states[1].field()).scaled(0.5f64.sqrt());
                let beats = beat_spectrum(&model, &SimState::new(grid, psi, None)?, c.horizon, c.probe, c.dt)?;
                let expected = (beats.energies[1] - beats.energies[0]) / c.constants.hbar;
                let peak = beats.peaks.first().map_or(f64::NAN, |p| p.0);
                env.metric("peak_omega", peak)
                    .metric("expected_omega", expected)
                    .metric("frequency_error", (peak - expected).abs())
                    .metric("resolution", 2.0 * PI / c.horizon)
                    .metric("energy_1", beats.energies[0])
                    .metric("energy_2", beats.energies[1])
                    .metric("peak_amplitude", beats.max_amplitude());
                let passed = (peak - expected).abs() <= 2.0 * PI / c.horizon;
                env.verdict("bohr_frequency", passed, &["frequency_error", "resolution"])?;
                env.warnings.extend(beats.warnings.iter().cloned());
                let spec = trailing_spectrum(&beats.current, beats.current.span(), true)?;
                env.series("current", beats.current);
                (spec, 5.0 * expected.abs().max(2.0 * PI / c.horizon))
            }
        };
        let (table, plot) = spectrum_outputs(&spec, max_omega);
        Ok(Artifacts { report: env, tables: vec![table], plots: vec![("spectrum".into(), plot)] })
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use serde_json::json;

    use super::*;

    #[test]
    fn trace_source_needs_a_file() {
        assert_eq!(prepare(&json!({"source": "trace"}), 0).err().unwrap().key, "trace");
        assert_eq!(prepare(&json!({"source": "trace", "trace": "/no/such.csv"}), 0).err().unwrap().key, "trace");
        assert_eq!(prepare(&json!({"trace": "x.csv"}), 0).err().unwrap().key, "trace");
    }

    #[test]
    fn pure_tone_from_csv() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,value_re,value_im").unwrap();
        for k in 0..2000 {
            let t = 0.1 * k as f64;
            writeln!(f, "{t},{},{}", (0.7 * t).cos(), -(0.7 * t).sin()).unwrap();
        }
        f.flush().unwrap();
        let doc = json!({"source": "trace", "trace": f.path()});
        let out = prepare(&doc, 0).unwrap().run().unwrap();
        let m = &out.report.metrics;
        assert!((m["omega_estimate"] - 0.7).abs() < 0.5 * m["resolution"], "{m:?}");
        assert!(out.report.all_passed());
    }
}
