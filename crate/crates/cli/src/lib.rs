//! Command-line driver: configuration handling, experiment subcommands, sweeps and
//! persisted artifacts.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::config::ConfigError;
use crate::output::Artifacts;

/// Exit status for a run whose verdicts did not all pass.
pub const EXIT_VERDICT: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "attractorlab", version, about = "Attraction, quasiclassics and diffraction experiments")]
pub struct Cli {
    pub command: Command,
    /// JSON configuration document.
    #[arg(long)]
    pub config: PathBuf,
    /// Override a configuration key (dotted paths reach nested keys); repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized initial data.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Loads the configuration, runs the command and writes its artifacts.
pub fn run(cli: &Cli) -> Result<Artifacts, Failure> {
    let mut doc = config::load(&cli.config)?;
    for assignment in &cli.set {
        config::apply_override(&mut doc, assignment)?;
    }
    let artifacts = match cli.command {
        Command::Sweep => {
            let threads = sweep::threads_from_env()?;
            let (spec, seed, points) = sweep::prepare(doc, cli.seed)?;
            sweep::run(&spec, seed, &points, threads)?
        }
        c => commands::prepare(c, doc, cli.seed)?.run()?,
    };
    artifacts.report.validate().map_err(anyhow::Error::from)?;
    output::write_artifacts(&cli.out, &artifacts)?;
    Ok(artifacts)
}

/// Runs and maps the outcome to the process exit code, reporting on stderr.
pub fn main_with(cli: &Cli) -> ExitCode {
    match run(cli) {
        Ok(a) if a.report.all_passed() => {
            eprintln!("all {} verdicts passed; report in {}", a.report.verdicts.len(), cli.out.display());
            ExitCode::SUCCESS
        }
        Ok(a) => {
            eprintln!("failed verdicts: {}", a.report.failed().join(", "));
            ExitCode::from(EXIT_VERDICT)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
