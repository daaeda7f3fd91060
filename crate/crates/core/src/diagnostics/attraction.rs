//! End-to-end attraction runs for the three wave-type models.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::fatou::{fatou_check, LimitObject, FATOU_TOL};
use crate::diagnostics::manifold::manifold_distance;
use crate::diagnostics::norms::{window_norm, NormOrder};
use crate::diagnostics::reduced::reduced_oracle_gap;
use crate::diagnostics::soliton::soliton_fit;
use crate::diagnostics::spectrum::dominant_frequency;
use crate::energy::{discrete_energy, local_energy};
use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::initial::RandomData;
use crate::integrate::{evolve_observed, StepPlan};
use crate::models::{ModelKind, ModelSpec};
use crate::report::ReportEnvelope;
use crate::state::{Field, SimState, TraceSeries};
use crate::stationary::{kink_profile, kink_value, orbit_family, solve_stationary_orbits, stationary_states};

/// Discretization and observation settings shared by the runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Observation radius `R`.
    pub radius: f64,
    /// Distance beyond `R + t_final` kept free of boundary reflections.
    pub margin: f64,
    /// Time between recorded diagnostics; must be a multiple of `dt`.
    pub sample_every: f64,
}

impl RunParams {
    pub fn new(t_final: f64) -> Self {
        Self { dx: 0.05, dt: 0.025, t_final, radius: 5.0, margin: 1.0, sample_every: 1.0 }
    }

    fn stride(&self) -> Result<usize> {
        let k = (self.sample_every / self.dt).round();
        if k < 1.0 || (k * self.dt - self.sample_every).abs() > 1e-9 * self.sample_every {
            return Err(LabError::InvalidArgument(format!(
                "sample_every {} is not a multiple of dt {}",
                self.sample_every, self.dt
            )));
        }
        Ok(k as usize)
    }

    fn plan(&self) -> Result<StepPlan> {
        let mut plan = StepPlan::leapfrog(self.dt, self.t_final, self.radius, self.stride()?);
        plan.light_cone_margin = self.margin;
        Ok(plan)
    }

    /// Grid just large enough for the light-cone rule.
    pub fn grid(&self, extra: f64) -> Result<Grid1D> {
        Grid1D::covering(self.radius + self.t_final + self.margin + extra, self.dx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    pub model: ModelKind,
    /// Local misfit to the limit object over the observation window.
    pub local_seminorm_series: TraceSeries,
    pub omega_estimate: Option<f64>,
    pub spectral_concentration: Option<f64>,
    pub manifold_distance_series: Option<TraceSeries>,
    /// `H(limit) − H(initial)`.
    pub fatou_gap: f64,
    /// Cumulative energy through `|x| = R`.
    pub radiated_energy: f64,
    pub trace: TraceSeries,
    pub limit: LimitObject,
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub warnings: Vec<String>,
}

impl AttractionReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Report envelope with every metric, the main series and the verdicts.
    pub fn envelope(&self, config_echo: serde_json::Value) -> Result<ReportEnvelope> {
        let mut env = ReportEnvelope::new(config_echo);
        for (k, v) in &self.metrics {
            env.metric(k.clone(), *v);
        }
        env.metric("fatou_gap", self.fatou_gap);
        env.metric("radiated_energy", self.radiated_energy);
        if let Some(w) = self.omega_estimate {
            env.metric("omega_estimate", w);
        }
        if let Some(c) = self.spectral_concentration {
            env.metric("spectral_concentration", c);
        }
        env.series("trace", self.trace.clone());
        env.series("local_seminorm", self.local_seminorm_series.clone());
        if let Some(s) = &self.manifold_distance_series {
            env.series("manifold_distance", s.clone());
        }
        for (name, passed) in &self.verdicts {
            let metrics = verdict_metrics(name);
            env.verdict(name.clone(), *passed, &metrics)?;
        }
        env.warnings.extend(self.warnings.iter().cloned());
        Ok(env)
    }
}

fn verdict_metrics(verdict: &str) -> Vec<&'static str> {
    match verdict {
        "converged" => vec!["limit_error"],
        "monotone_decay" => vec!["monotone_decay"],
        "ode_agreement" => vec!["ode_gap"],
        "fatou" => vec!["fatou_gap"],
        "spectral_concentration" => vec!["spectral_concentration"],
        "omega_in_gap" => vec!["omega_estimate"],
        "distance_reduction" => vec!["distance_ratio"],
        "kink_misfit" => vec!["misfit_ratio"],
        _ => vec![],
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Medians over consecutive blocks of `block` samples from `t_start` on must not increase
/// by more than `floor`.
pub fn trailing_medians_monotone(series: &TraceSeries, t_start: f64, block: usize, floor: f64) -> bool {
    let values: Vec<f64> =
        series.times.iter().zip(&series.values).filter(|(t, _)| **t >= t_start - 1e-9).map(|(_, v)| v.norm()).collect();
    let medians: Vec<f64> = values.chunks_exact(block.max(1)).map(|c| median(&mut c.to_vec())).collect();
    medians.windows(2).all(|w| w[1] <= w[0] + floor)
}

fn trailing_median(series: &TraceSeries, window: f64) -> f64 {
    let end = series.times.last().copied().unwrap_or(0.0);
    let mut tail: Vec<f64> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= end - window - 1e-9)
        .map(|(_, v)| v.norm())
        .collect();
    median(&mut tail)
}

fn value_at(series: &TraceSeries, t: f64) -> Option<f64> {
    series.times.iter().position(|&s| (s - t).abs() < 1e-9).map(|i| series.values[i].norm())
}

/// Noise floor for the monotone-decay verdict.
pub const MONOTONE_FLOOR: f64 = 1e-8;

/// Random compact data for the string with a point oscillator; limit is the stationary
/// state nearest to `y(T)`.
pub fn lamb_attraction(
    model: &ModelSpec,
    params: &RunParams,
    data: &RandomData,
    seed: u64,
) -> Result<AttractionReport> {
    if model.kind != ModelKind::LambString {
        return Err(LabError::InvalidModel(format!("expected LambString, got {:?}", model.kind)));
    }
    let states = stationary_states(model)?;
    if states.degenerate || states.states.is_empty() {
        return Err(LabError::InvalidModel("F has no isolated zeros; no constant limit to test".into()));
    }
    let grid = params.grid(0.0)?;
    let initial = data.sample(&grid, 0.0, seed)?;
    let e0 = discrete_energy(&initial, model)?;
    let plan = params.plan()?;
    let constants: Vec<f64> = states.states.iter().map(|s| s.value).collect();
    let refs: Vec<Field> = constants.iter().map(|&c| Field::from_real(vec![c; grid.len()])).collect();
    let mut misfits: Vec<TraceSeries> = constants.iter().map(|_| TraceSeries::default()).collect();
    let mut local = Vec::new();
    let mut drift = 0.0f64;
    let evo = evolve_observed(&initial, model, &plan, |s| {
        for (series, r) in misfits.iter_mut().zip(&refs) {
            let d = window_norm(&s.grid, &s.field, Some(r), 0.0, params.radius, NormOrder::L2)?;
            series.push(s.t, d.into());
        }
        local.push((s.t, local_energy(s, model, params.radius)?));
        drift = drift.max((discrete_energy(s, model)? - e0).abs());
        Ok(())
    })?;
    let y_final = evo.final_state.field.re[grid.origin().expect("symmetric grid")];
    let (k, limit) = constants
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - y_final).abs().total_cmp(&(b.1 - y_final).abs()))
        .map(|(k, &c)| (k, c))
        .expect("nonempty");
    let series = misfits.swap_remove(k);
    let t_exit = data.exit_time();
    let monotone = trailing_medians_monotone(&series, t_exit, 5, MONOTONE_FLOOR);
    let ode_gap = reduced_oracle_gap(&evo.trace, model, t_exit)?;
    let limit_obj = LimitObject::Constant(limit);
    let fatou_gap = fatou_check(&initial, &limit_obj, model)?;
    let flux = evo.flux.as_ref();
    let radiated = flux.map_or(0.0, |f| f.final_total());
    let ledger_drift = ledger_drift(&local, flux, e0);

    let mut metrics = BTreeMap::new();
    metrics.insert("y_final".into(), y_final);
    metrics.insert("limit_value".into(), limit);
    metrics.insert("limit_error".into(), (y_final - limit).abs());
    metrics.insert("monotone_decay".into(), if monotone { 1.0 } else { 0.0 });
    metrics.insert("ode_gap".into(), ode_gap);
    metrics.insert("initial_energy".into(), e0);
    metrics.insert("ledger_drift".into(), ledger_drift);
    metrics.insert("exit_time".into(), t_exit);
    metrics.insert("energy_drift".into(), drift / e0.abs());
    let mut verdicts = BTreeMap::new();
    verdicts.insert("converged".into(), (y_final - limit).abs() <= 1e-4);
    verdicts.insert("monotone_decay".into(), monotone);
    verdicts.insert("ode_agreement".into(), ode_gap <= 1e-3);
    verdicts.insert("fatou".into(), fatou_gap <= FATOU_TOL);
    Ok(AttractionReport {
        model: ModelKind::LambString,
        local_seminorm_series: series,
        omega_estimate: None,
        spectral_concentration: None,
        manifold_distance_series: None,
        fatou_gap,
        radiated_energy: radiated,
        trace: evo.trace,
        limit: limit_obj,
        metrics,
        verdicts,
        warnings: evo.warnings,
    })
}

/// Max over snapshots of `|E_local(t) + flux(t) − E_total(0)| / |E_total(0)|`.
fn ledger_drift(local: &[(f64, f64)], flux: Option<&crate::integrate::FluxLedger>, e0: f64) -> f64 {
    let Some(flux) = flux else { return f64::NAN };
    let mut worst = 0.0f64;
    for &(t, e) in local {
        if let Some(k) = flux.times.iter().position(|&s| (s - t).abs() < 1e-9) {
            worst = worst.max((e + flux.total[k] - e0).abs());
        }
    }
    worst / e0.abs().max(f64::MIN_POSITIVE)
}

/// Settings specific to the U(1) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitRunParams {
    /// Trailing window of the trace used for the frequency estimate.
    pub spectral_window: f64,
    /// Frequencies sampled on `[0, m)` for the solitary manifold.
    pub omega_samples: usize,
    /// Time of the reference distance.
    pub reference_time: f64,
    /// Trailing window for the final distance median.
    pub final_window: f64,
}

impl Default for OrbitRunParams {
    fn default() -> Self {
        Self { spectral_window: 100.0, omega_samples: 400, reference_time: 10.0, final_window: 10.0 }
    }
}

/// Random compact data for the U(1) model with a point oscillator.
pub fn kgu1_attraction(
    model: &ModelSpec,
    params: &RunParams,
    orbit_params: &OrbitRunParams,
    data: &RandomData,
    seed: u64,
) -> Result<AttractionReport> {
    if model.kind != ModelKind::KGU1 {
        return Err(LabError::InvalidModel(format!("expected KGU1, got {:?}", model.kind)));
    }
    let grid = params.grid(0.0)?;
    let data = RandomData { complex: true, ..data.clone() };
    let initial = data.sample(&grid, model.mass, seed)?;
    let e0 = discrete_energy(&initial, model)?;
    let m = model.mass;
    let omegas: Vec<f64> = (0..orbit_params.omega_samples.max(1))
        .map(|k| m * k as f64 / orbit_params.omega_samples.max(1) as f64)
        .collect();
    let family_grid = Grid1D::covering(params.radius + 1.0, params.dx)?;
    let family = orbit_family(model, &omegas, &family_grid)?;
    if family.is_empty() {
        return Err(LabError::EmptyOrbitList);
    }
    let zero = Field::zeros(grid.len());
    let plan = params.plan()?;
    let mut distance = TraceSeries::default();
    let mut local = Vec::new();
    let mut seminorm = TraceSeries::default();
    let mut drift = 0.0f64;
    let evo = evolve_observed(&initial, model, &plan, |s| {
        let fit = manifold_distance(s, &family, params.radius)?;
        distance.push(s.t, fit.distance.into());
        seminorm.push(s.t, window_norm(&s.grid, &s.field, Some(&zero), 0.0, params.radius, NormOrder::L2)?.into());
        local.push((s.t, local_energy(s, model, params.radius)?));
        drift = drift.max((discrete_energy(s, model)? - e0).abs());
        Ok(())
    })?;
    let est = dominant_frequency(&evo.trace, orbit_params.spectral_window)?;
    let d_ref = value_at(&distance, orbit_params.reference_time)
        .ok_or_else(|| LabError::InvalidArgument("reference time is not a sample time".into()))?;
    let d_final = trailing_median(&distance, orbit_params.final_window);
    let ratio = d_ref / d_final;

    // Limit orbit: the fitted frequency when it lies in the gap, else the best manifold fit.
    let final_fit = manifold_distance(&evo.final_state, &family, params.radius)?;
    let omega_limit = if est.omega.abs() < m && !est.degenerate { est.omega } else { final_fit.omega };
    let y_abs = evo.trace.values.last().map_or(0.0, |v| v.norm());
    let limit_orbit = match solve_stationary_orbits(model, omega_limit, &grid) {
        Ok(list) => list.into_iter().min_by(|a, b| (a.amplitude - y_abs).abs().total_cmp(&(b.amplitude - y_abs).abs())),
        Err(LabError::NoOrbit(_)) => None,
        Err(e) => return Err(e),
    };
    let limit_orbit = match limit_orbit {
        Some(o) => o,
        None => solve_stationary_orbits(model, final_fit.omega, &grid)?.swap_remove(0),
    };
    let limit = LimitObject::Orbit { orbit: limit_orbit, theta: final_fit.theta };
    let fatou_gap = fatou_check(&initial, &limit, model)?;
    let flux = evo.flux.as_ref();
    let radiated = flux.map_or(0.0, |f| f.final_total());

    let mut metrics = BTreeMap::new();
    metrics.insert("distance_reference".into(), d_ref);
    metrics.insert("distance_final".into(), d_final);
    metrics.insert("distance_ratio".into(), ratio);
    metrics.insert("trace_modulus_final".into(), y_abs);
    metrics.insert(
        "limit_amplitude".into(),
        if let LimitObject::Orbit { orbit, .. } = &limit { orbit.amplitude } else { 0.0 },
    );
    metrics.insert("initial_energy".into(), e0);
    metrics.insert("ledger_drift".into(), ledger_drift(&local, flux, e0));
    metrics.insert("energy_drift".into(), drift / e0.abs());
    let mut verdicts = BTreeMap::new();
    verdicts.insert("spectral_concentration".into(), est.concentration >= 0.95);
    verdicts.insert("omega_in_gap".into(), est.omega.abs() < m && !est.degenerate);
    verdicts.insert("distance_reduction".into(), ratio >= 10.0);
    verdicts.insert("fatou".into(), fatou_gap <= FATOU_TOL);
    Ok(AttractionReport {
        model: ModelKind::KGU1,
        local_seminorm_series: seminorm,
        omega_estimate: Some(est.omega),
        spectral_concentration: Some(est.concentration),
        manifold_distance_series: Some(distance),
        fatou_gap,
        radiated_energy: radiated,
        trace: evo.trace,
        limit,
        metrics,
        verdicts,
        warnings: evo.warnings,
    })
}

/// Settings of the kink run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinkRunParams {
    pub velocity: f64,
    pub center: f64,
    /// Amplitude of the even bump `ε e^{−((x − x₀)/w)²}` added to the field.
    pub perturbation: f64,
    pub perturbation_width: f64,
    /// Half-width of the comoving window.
    pub window: f64,
}

impl Default for KinkRunParams {
    fn default() -> Self {
        Self { velocity: 0.3, center: 0.0, perturbation: 0.05, perturbation_width: 1.0, window: 10.0 }
    }
}

/// Boosted kink, optionally perturbed; fits the kink at `t_final`.
pub fn phi4_kink_run(model: &ModelSpec, params: &RunParams, kink: &KinkRunParams) -> Result<AttractionReport> {
    if model.kind != ModelKind::Phi4 {
        return Err(LabError::InvalidModel(format!("expected Phi4, got {:?}", model.kind)));
    }
    let mut params = params.clone();
    params.radius = params.radius.max(kink.window);
    let grid = params.grid(kink.center.abs())?;
    let profile = kink_profile(model, kink.velocity, kink.center, &grid)?;
    let bump = Field::from_real_fn(&grid, |x| {
        kink.perturbation * (-((x - kink.center) / kink.perturbation_width).powi(2)).exp()
    });
    let mut initial = profile.state();
    initial.field = initial.field.add(&bump);
    let perturbation_norm = window_norm(&grid, &bump, None, kink.center, kink.window, NormOrder::L2)?;
    let e0 = discrete_energy(&initial, model)?;
    let plan = params.plan()?;
    let mut misfit = TraceSeries::default();
    let mut drift = 0.0f64;
    let evo = evolve_observed(&initial, model, &plan, |s| {
        drift = drift.max((discrete_energy(s, model)? - e0).abs());
        let c = kink.center + kink.velocity * s.t;
        let reference = Field::from_real_fn(&grid, |x| kink_value(kink.velocity, kink.center, x, s.t));
        misfit.push(s.t, window_norm(&grid, &s.field, Some(&reference), c, kink.window, NormOrder::L2)?.into());
        Ok(())
    })?;
    let fit = soliton_fit(&evo.final_state, model, kink.window)?;
    // Centre of the fitted kink at t = 0, for the energy of the limit object.
    let limit = LimitObject::Kink { velocity: fit.velocity, center: fit.center - fit.velocity * evo.final_state.t };
    let fatou_gap = fatou_check(&initial, &limit, model)?;
    let ratio = if perturbation_norm > 0.0 { fit.residual / perturbation_norm } else { f64::NAN };

    let mut metrics = BTreeMap::new();
    metrics.insert("fit_velocity".into(), fit.velocity);
    metrics.insert("fit_center".into(), fit.center);
    metrics.insert("fit_residual".into(), fit.residual);
    metrics.insert("perturbation_norm".into(), perturbation_norm);
    metrics.insert("misfit_ratio".into(), ratio);
    metrics.insert("reference_error_final".into(), misfit.values.last().map_or(f64::NAN, |v| v.re));
    metrics.insert("initial_energy".into(), e0);
    metrics.insert("energy_drift".into(), drift / e0.abs());
    let mut verdicts = BTreeMap::new();
    if perturbation_norm > 0.0 {
        verdicts.insert("kink_misfit".into(), ratio <= 0.1);
    }
    verdicts.insert("fatou".into(), fatou_gap <= FATOU_TOL);
    let radiated = evo.flux.as_ref().map_or(0.0, |f| f.final_total());
    Ok(AttractionReport {
        model: ModelKind::Phi4,
        local_seminorm_series: misfit,
        omega_estimate: None,
        spectral_concentration: None,
        manifold_distance_series: None,
        fatou_gap,
        radiated_energy: radiated,
        trace: evo.trace,
        limit,
        metrics,
        verdicts,
        warnings: evo.warnings,
    })
}

/// `SimState` helper used by callers that only need the initial data of a run.
pub fn lamb_initial(params: &RunParams, data: &RandomData, seed: u64) -> Result<SimState> {
    data.sample(&params.grid(0.0)?, 0.0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn monotone_medians() {
        let times: Vec<f64> = (0..40).map(|k| k as f64).collect();
        let decaying: Vec<Complex64> = times.iter().map(|t| Complex64::new((-t / 5.0).exp(), 0.0)).collect();
        let s = TraceSeries::new(times.clone(), decaying).unwrap();
        assert!(trailing_medians_monotone(&s, 5.0, 5, 0.0));
        let bumpy: Vec<Complex64> =
            times.iter().map(|t| Complex64::new(if *t > 30.0 { 1.0 } else { 0.1 }, 0.0)).collect();
        let s = TraceSeries::new(times, bumpy).unwrap();
        assert!(!trailing_medians_monotone(&s, 5.0, 5, 1e-8));
    }

    #[test]
    fn sample_stride_must_divide() {
        let mut p = RunParams::new(10.0);
        p.sample_every = 0.03;
        assert!(p.stride().is_err());
    }
}
