use std::process::ExitCode;

use attractorlab_cli::{main_with, Cli};
use clap::Parser;

fn main() -> ExitCode {
    main_with(&Cli::parse())
}
