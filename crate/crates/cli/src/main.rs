use std::process::ExitCode;

use clap::Parser;
use redistrib_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let invocation = std::env::args().skip(1).collect();
    ExitCode::from(run(&cli, invocation))
}
