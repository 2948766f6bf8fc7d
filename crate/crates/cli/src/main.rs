use std::process::ExitCode;

use clap::Parser;
use faircurve_cli::cli::{main_with, Cli};

fn main() -> ExitCode {
    main_with(Cli::parse())
}
