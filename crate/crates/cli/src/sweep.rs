//! Parameter sweeps over any single-experiment command.

use std::collections::BTreeSet;

use attractorlab_core::ReportEnvelope;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{self, Command, Experiment};
use crate::config::{self, ensure, ConfigError, ConfigResult};
use crate::output::{num, Artifacts, Table};

pub const THREADS_ENV: &str = "ATTRACTORLAB_THREADS";

/// One grid axis: a (possibly dotted) config key and its values, given either
/// explicitly or by a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Value>>,
    /// `[start, stop, n]`, endpoints included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<(f64, f64, usize)>,
    /// `[start, ratio, n]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<(f64, f64, usize)>,
}

impl Axis {
    fn expand(&self, index: usize) -> ConfigResult<Vec<Value>> {
        let key = format!("grid[{index}]");
        let given = [self.values.is_some(), self.linspace.is_some(), self.geometric.is_some()];
        ensure(given.iter().filter(|&&g| g).count() == 1, &key, "give exactly one of values, linspace, geometric")?;
        ensure(!self.key.is_empty(), &format!("{key}.key"), "must not be empty")?;
        let nums = |v: Vec<f64>| v.into_iter().map(Value::from).collect();
        Ok(match (&self.values, self.linspace, self.geometric) {
            (Some(v), _, _) => v.clone(),
            (_, Some((a, b, n)), _) => {
                nums((0..n).map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
            }
            (_, _, Some((a, r, n))) => nums((0..n).map(|i| a * r.powi(i as i32)).collect()),
            _ => unreachable!("exactly one generator is present"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Command run at every grid point.
    pub experiment: Command,
    /// Configuration shared by all points.
    #[serde(default = "empty_object")]
    pub base: Value,
    pub grid: Vec<Axis>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// A validated grid point.
pub struct Point {
    pub assignment: Vec<(String, Value)>,
    pub experiment: Box<dyn Experiment>,
}

fn describe(assignment: &[(String, Value)]) -> String {
    assignment.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

/// Parses the sweep and every point's configuration. Nothing runs if any point is invalid.
pub fn prepare(mut doc: Value, seed: Option<u64>) -> ConfigResult<(SweepConfig, u64, Vec<Point>)> {
    let seed = commands::split_common(Command::Sweep, &mut doc, seed)?;
    let sweep: SweepConfig = config::parse(&doc)?;
    ensure(sweep.experiment != Command::Sweep, "experiment", "sweeps cannot be nested")?;
    ensure(sweep.base.is_object(), "base", "must be a JSON object")?;
    ensure(!sweep.grid.is_empty(), "grid", "the parameter grid is empty")?;
    let axes: Vec<Vec<Value>> = sweep.grid.iter().enumerate().map(|(i, a)| a.expand(i)).collect::<ConfigResult<_>>()?;
    for (i, values) in axes.iter().enumerate() {
        ensure(!values.is_empty(), &format!("grid[{i}]"), "axis has no values")?;
    }
    let mut assignments: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for (axis, values) in sweep.grid.iter().zip(&axes) {
        assignments = assignments
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut a = prefix.clone();
                    a.push((axis.key.clone(), v.clone()));
                    a
                })
            })
            .collect();
    }
    let mut points = Vec::with_capacity(assignments.len());
    for (i, assignment) in assignments.into_iter().enumerate() {
        let at = |e: ConfigError| {
            ConfigError::new(e.key, format!("{} (sweep point {i}: {})", e.message, describe(&assignment)))
        };
        let mut sub = sweep.base.clone();
        for (k, v) in &assignment {
            config::set_path(&mut sub, k, v.clone()).map_err(at)?;
        }
        let experiment = commands::prepare(sweep.experiment, sub, Some(seed)).map_err(at)?;
        points.push(Point { assignment, experiment });
    }
    Ok((sweep, seed, points))
}

/// Worker count from the environment, if set.
pub fn threads_from_env() -> ConfigResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::new(THREADS_ENV, format!("must be a positive integer, got `{s}`"))),
        },
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), num),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs all points on a worker pool and aggregates them. Only this function's
/// caller writes files.
pub fn run(sweep: &SweepConfig, seed: u64, points: &[Point], threads: Option<usize>) -> anyhow::Result<Artifacts> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let results: Vec<anyhow::Result<Artifacts>> =
        pool.install(|| points.par_iter().map(|p| p.experiment.run()).collect());

    let mut echo = serde_json::to_value(sweep)?;
    if let Value::Object(m) = &mut echo {
        m.insert("command".into(), Value::String(Command::Sweep.name().into()));
        m.insert("seed".into(), Value::from(seed));
    }
    let mut env = ReportEnvelope::new(echo);
    let metric_names: BTreeSet<String> =
        results.iter().flatten().flat_map(|a| a.report.metrics.keys().cloned()).collect();
    let mut header: Vec<String> = vec!["point".into()];
    header.extend(sweep.grid.iter().map(|a| a.key.clone()));
    header.extend(metric_names.iter().cloned());
    header.extend(["passed", "failed_verdicts", "error"].map(String::from));
    let mut table = Table { name: "sweep".into(), header, rows: Vec::new() };

    let width = points.len().saturating_sub(1).to_string().len();
    let mut passed_points = 0usize;
    for (i, (point, result)) in points.iter().zip(results).enumerate() {
        let prefix = format!("point_{i:0width$}");
        let mut row = vec![i.to_string()];
        row.extend(point.assignment.iter().map(|(_, v)| cell(v)));
        match result {
            Ok(mut artifacts) => {
                let r = &artifacts.report;
                row.extend(metric_names.iter().map(|m| r.metrics.get(m).map_or_else(String::new, |v| num(*v))));
                let passed = r.all_passed();
                passed_points += passed as usize;
                row.extend([passed.to_string(), r.failed().join(";"), String::new()]);
                artifacts.report.series.clear();
                env.absorb(&prefix, artifacts.report);
            }
            Err(e) => {
                row.extend(metric_names.iter().map(|_| String::new()));
                row.extend(["false".into(), String::new(), format!("{e:#}")]);
                env.verdict(format!("{prefix}.completed"), false, &[])?;
                env.warnings.push(format!("{prefix} ({}): {e:#}", describe(&point.assignment)));
            }
        }
        table.rows.push(row);
    }
    env.metric("points", points.len() as f64).metric("passed_points", passed_points as f64);
    Ok(Artifacts { report: env, tables: vec![table], plots: Vec::new() })
}
