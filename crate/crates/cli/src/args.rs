use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::dataset::Format;

#[derive(Parser, Debug)]
#[command(
    name = "redistrib",
    version,
    about = "Apply, check and classify redistribution rules on income–need datasets",
    after_help = "Rule specs: lf | full | prop | nafr | ab:A=<fn>,B=<fn> | afam:A=<fn> | bfam:B=<fn>\n\
                  \x20          | lin:<r>,<r> | lindual:<r>,<r> | convex(<rule>;<rule>;<w>) | dual(<rule>)\n\
                  Functions:  const:<r> | id | scale:<r> | affine:<a>,<b> | poly:<c0>[,<c1>...]\n\
                  Exit codes: 0 ok, 1 axiom failure, 2 bad rule/axiom/grid, 3 bad dataset, 4 other"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Dataset path (CSV `id,income,need` or JSON `{"agents":[...]}`)
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Dataset format; inferred from the extension when omitted
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Report destination, `-` for stdout
    #[arg(long, global = true, default_value = "-")]
    pub output: String,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Sampled problems per check
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,

    /// Relative tolerance, scaled by max(1, |Y|, Z)
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Ratio grid `lo:hi:step`, endpoints inclusive
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,

    /// Omit the timestamp so reports are byte-identical across runs
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Allocate the dataset with one rule
    Apply {
        #[arg(long)]
        rule: String,
    },
    /// Run sampled axiom checks; exits 1 if any axiom fails
    Check {
        #[arg(long)]
        rule: String,
        /// Comma-separated axiom names, `core`, or `all`
        #[arg(long, default_value = "all")]
        axioms: String,
    },
    /// Closed-form dual of a rule and the dual's classification
    Dual {
        #[arg(long)]
        rule: String,
    },
    /// Sample A(t), B(t) on the grid
    Extract {
        #[arg(long)]
        rule: String,
    },
    /// Label a rule from its sampled AB profile
    Classify {
        #[arg(long)]
        rule: String,
    },
    /// Allocate the dataset with several rules side by side
    Compare {
        /// Comma-separated rule specs
        #[arg(long)]
        rules: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Apply { .. } => "apply",
            Command::Check { .. } => "check",
            Command::Dual { .. } => "dual",
            Command::Extract { .. } => "extract",
            Command::Classify { .. } => "classify",
            Command::Compare { .. } => "compare",
        }
    }
}
