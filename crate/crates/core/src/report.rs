//! Report envelope shared by every experiment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::state::TraceSeries;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub config_echo: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub series: BTreeMap<String, TraceSeries>,
    pub verdicts: BTreeMap<String, bool>,
    /// Metrics each verdict was decided from.
    pub verdict_metrics: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ReportEnvelope {
    pub fn new(config_echo: serde_json::Value) -> Self {
        Self { config_echo, ..Default::default() }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.metrics.insert(name.into(), value);
        self
    }

    pub fn series(&mut self, name: impl Into<String>, series: TraceSeries) -> &mut Self {
        self.series.insert(name.into(), series);
        self
    }

    /// Records a verdict; every metric it names must already be present.
    pub fn verdict(&mut self, name: impl Into<String>, passed: bool, metrics: &[&str]) -> Result<&mut Self> {
        let name = name.into();
        for m in metrics {
            if !self.metrics.contains_key(*m) {
                return Err(LabError::MissingMetric { verdict: name, metric: m.to_string() });
            }
        }
        self.verdict_metrics.insert(name.clone(), metrics.iter().map(|s| s.to_string()).collect());
        self.verdicts.insert(name, passed);
        Ok(self)
    }

    /// `metric ≤ bound` as a verdict named `name`.
    pub fn check_at_most(&mut self, name: &str, metric: &str, bound: f64) -> Result<&mut Self> {
        let passed = self.metrics.get(metric).is_some_and(|v| *v <= bound);
        self.verdict(name, passed, &[metric])
    }

    /// `metric ≥ bound` as a verdict named `name`.
    pub fn check_at_least(&mut self, name: &str, metric: &str, bound: f64) -> Result<&mut Self> {
        let passed = self.metrics.get(metric).is_some_and(|v| *v >= bound);
        self.verdict(name, passed, &[metric])
    }

    pub fn validate(&self) -> Result<()> {
        for name in self.verdicts.keys() {
            for m in self.verdict_metrics.get(name).into_iter().flatten() {
                if !self.metrics.contains_key(m) {
                    return Err(LabError::MissingMetric { verdict: name.clone(), metric: m.clone() });
                }
            }
        }
        Ok(())
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|(_, &v)| !v).map(|(k, _)| k.as_str()).collect()
    }

    /// Merges `other` with every key prefixed by `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ReportEnvelope) {
        let key = |k: String| format!("{prefix}.{k}");
        for (k, v) in other.metrics {
            self.metrics.insert(key(k), v);
        }
        for (k, v) in other.series {
            self.series.insert(key(k), v);
        }
        for (k, v) in other.verdicts {
            self.verdicts.insert(key(k), v);
        }
        for (k, v) in other.verdict_metrics {
            self.verdict_metrics.insert(key(k), v.into_iter().map(key).collect());
        }
        self.warnings.extend(other.warnings.into_iter().map(|w| format!("{prefix}: {w}")));
    }
}
