//! Experiment subcommands. Each one parses its configuration up front and returns an
//! [`Experiment`] that can be run later, possibly on a worker thread.

mod diffract;
mod gun;
mod pipeline;
mod simulate;
mod spectrum;
mod stationary;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{self, ConfigError, ConfigResult};
use crate::output::Artifacts;

pub use diffract::DiffractConfig;
pub use gun::GunSection;
pub use pipeline::PipelineConfig;
pub use simulate::{ModelChoice, SimulateConfig};
pub use spectrum::{SpectrumConfig, SpectrumSource};
pub use stationary::StationaryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Stationary,
    Spectrum,
    Gun,
    Diffract,
    Pipeline,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Stationary => "stationary",
            Command::Spectrum => "spectrum",
            Command::Gun => "gun",
            Command::Diffract => "diffract",
            Command::Pipeline => "pipeline",
            Command::Sweep => "sweep",
        }
    }
}

pub trait Experiment: Send + Sync {
    fn run(&self) -> anyhow::Result<Artifacts>;
}

/// Strips the shared `command` and `seed` keys and resolves the seed
/// (`--seed` wins over the document, default 0).
pub fn split_common(command: Command, doc: &mut Value, seed: Option<u64>) -> ConfigResult<u64> {
    if let Some(c) = config::take(doc, "command") {
        let named: Command = config::parse(&c).map_err(|e| ConfigError::new("command", e.message))?;
        config::ensure(
            named == command,
            "command",
            format!("document is for `{}`, not `{}`", named.name(), command.name()),
        )?;
    }
    let from_doc = match config::take(doc, "seed") {
        Some(v) => Some(v.as_u64().ok_or_else(|| ConfigError::new("seed", "must be a non-negative integer"))?),
        None => None,
    };
    Ok(seed.or(from_doc).unwrap_or(0))
}

/// Parses and validates a single-experiment configuration.
pub fn prepare(command: Command, mut doc: Value, seed: Option<u64>) -> ConfigResult<Box<dyn Experiment>> {
    let seed = split_common(command, &mut doc, seed)?;
    Ok(match command {
        Command::Simulate => Box::new(simulate::prepare(&doc, seed)?),
        Command::Stationary => Box::new(stationary::prepare(&doc, seed)?),
        Command::Spectrum => Box::new(spectrum::prepare(&doc, seed)?),
        Command::Gun => Box::new(gun::prepare(&doc, seed)?),
        Command::Diffract => Box::new(diffract::prepare(&doc, seed)?),
        Command::Pipeline => Box::new(pipeline::prepare(&doc, seed)?),
        Command::Sweep => return Err(ConfigError::new("command", "sweeps cannot be nested")),
    })
}

/// Full resolved configuration with the command and seed, for the report.
fn echo<T: Serialize>(command: Command, seed: u64, config: &T) -> Value {
    let mut v = serde_json::to_value(config).expect("configs serialize to JSON");
    if let Value::Object(m) = &mut v {
        m.insert("command".into(), Value::String(command.name().into()));
        m.insert("seed".into(), Value::from(seed));
    }
    v
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn seed_precedence() {
        let mut doc = json!({"seed": 7});
        assert_eq!(split_common(Command::Gun, &mut doc, Some(3)).unwrap(), 3);
        let mut doc = json!({"seed": 7});
        assert_eq!(split_common(Command::Gun, &mut doc, None).unwrap(), 7);
        assert_eq!(doc, json!({}));
        assert_eq!(split_common(Command::Gun, &mut json!({}), None).unwrap(), 0);
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let err = split_common(Command::Gun, &mut json!({"command": "diffract"}), None).unwrap_err();
        assert_eq!(err.key, "command");
        let err = split_common(Command::Gun, &mut json!({"seed": -1}), None).unwrap_err();
        assert_eq!(err.key, "seed");
    }

    #[test]
    fn every_default_config_is_valid() {
        for c in [
            Command::Simulate,
            Command::Stationary,
            Command::Spectrum,
            Command::Gun,
            Command::Diffract,
            Command::Pipeline,
        ] {
            assert!(prepare(c, json!({}), None).is_ok(), "{c:?}");
        }
        assert!(prepare(Command::Sweep, json!({}), None).is_err());
    }
}
