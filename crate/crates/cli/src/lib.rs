//! Command-line front end for `redistrib-core`: dataset loading, commands
//! and JSON reports.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod report;

use std::fs;
use std::io::Write;

pub use args::{Cli, Command};
pub use commands::{execute, Options, Outcome};
pub use dataset::{Dataset, Format, Record};
pub use error::{CliError, Result};
pub use report::{Report, Summary, SCHEMA_VERSION};

/// Runs a parsed invocation, writes the report, and returns the exit code.
pub fn run(cli: &Cli, invocation: Vec<String>) -> u8 {
    let opts = Options::from_cli(cli, invocation);
    match execute(&cli.command, &opts).and_then(|outcome| write_report(&outcome.report, &cli.output).map(|_| outcome)) {
        Ok(outcome) => {
            for line in &outcome.messages {
                eprintln!("{line}");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn write_report(report: &Report, output: &str) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    let io = |context: String| move |source| CliError::Io { context, source };
    if output == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(io("writing stdout".into()))?;
        out.flush().map_err(io("writing stdout".into()))
    } else {
        fs::write(output, text).map_err(io(format!("writing {output}")))
    }
}
