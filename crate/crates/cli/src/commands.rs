use std::path::PathBuf;

use redistrib_core::analysis::{DEFAULT_GRID, PROBE_AGENTS, PROBE_TOTAL_NEED};
use redistrib_core::{
    axiom_suite, check_self_dual, classify, closed_form_dual, evaluate, parse_axioms, parse_grid, parse_rule,
    parse_rule_list, profile_rule, RuleSpec, SampleConfig,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command};
use crate::dataset::{Dataset, Format};
use crate::error::{CliError, Result};
use crate::report::{agent_rows, coverage, Report, Summary, SCHEMA_VERSION};

const CLASSIFY_NOTE: &str =
    "label is consistent with the sampled grid and problems; it is not a proof of membership";

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Options {
    pub input: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub grid: Option<String>,
    pub timestamp: bool,
    pub invocation: Vec<String>,
}

impl Options {
    pub fn from_cli(cli: &Cli, invocation: Vec<String>) -> Options {
        Options {
            input: cli.input.clone(),
            format: cli.format,
            seed: cli.seed,
            samples: cli.samples,
            tol: cli.tol,
            grid: cli.grid.clone(),
            timestamp: !cli.no_timestamp,
            invocation,
        }
    }

    fn sample_config(&self) -> SampleConfig {
        SampleConfig::default().with_seed(self.seed).with_trials(self.samples)
    }

    fn grid(&self) -> Result<Vec<f64>> {
        match &self.grid {
            Some(spec) => Ok(parse_grid(spec)?),
            None => Ok(DEFAULT_GRID.to_vec()),
        }
    }

    fn dataset(&self) -> Result<Dataset> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| CliError::Usage("this command needs --input <path>".into()))?;
        Dataset::load(path, self.format)
    }

    fn report(&self, command: &'static str, rules: &[RuleSpec], result: Value) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            invocation: self.invocation.clone(),
            timestamp: self
                .timestamp
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            seed: self.seed,
            samples: self.samples,
            tolerance: self.tol,
            rules: rules.iter().map(ToString::to_string).collect(),
            result,
        }
    }
}

/// A finished command: the report, its exit code, and human-readable lines
/// for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: u8,
    pub messages: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Outcome {
        Outcome {
            report,
            exit_code: 0,
            messages: Vec::new(),
        }
    }
}

pub fn execute(command: &Command, opts: &Options) -> Result<Outcome> {
    match command {
        Command::Apply { rule } => cmd_apply(rule, opts),
        Command::Check { rule, axioms } => cmd_check(rule, axioms, opts),
        Command::Dual { rule } => cmd_dual(rule, opts),
        Command::Extract { rule } => cmd_extract(rule, opts),
        Command::Classify { rule } => cmd_classify(rule, opts),
        Command::Compare { rules } => cmd_compare(rules, opts),
    }
}

pub fn cmd_apply(rule: &str, opts: &Options) -> Result<Outcome> {
    let rule = parse_rule(rule)?;
    let p = opts.dataset()?.problem()?;
    let x = evaluate(&rule, &p)?;
    let result = json!({
        "allocations": agent_rows(&p, x.values()),
        "summary": Summary::of(x.values()),
    });
    Ok(Outcome::ok(opts.report("apply", &[rule], result)))
}

pub fn cmd_check(rule: &str, axioms: &str, opts: &Options) -> Result<Outcome> {
    let rule = parse_rule(rule)?;
    let axioms = parse_axioms(axioms)?;
    let reports = axiom_suite(&rule, &axioms, &opts.sample_config(), opts.tol)?;
    let passed = reports.iter().all(|r| r.passed);
    let messages = reports
        .iter()
        .map(|r| match &r.counterexample {
            None => format!("PASS {} ({} trials)", r.axiom, r.trials_run),
            Some(c) => format!(
                "FAIL {} at trial {}: deviation {:e} > {:e}",
                r.axiom, c.trial, c.deviation, c.threshold
            ),
        })
        .collect();
    let result = json!({ "passed": passed, "axioms": reports });
    Ok(Outcome {
        report: opts.report("check", &[rule], result),
        exit_code: if passed { 0 } else { 1 },
        messages,
    })
}

pub fn cmd_dual(rule: &str, opts: &Options) -> Result<Outcome> {
    let rule = parse_rule(rule)?;
    let cfg = opts.sample_config();
    let dual = closed_form_dual(&rule).unwrap_or_else(|| RuleSpec::dual(rule.clone()));
    let classification = classify(&dual, &opts.grid()?, &cfg, opts.tol)?;
    let self_dual = check_self_dual(&rule, &cfg, opts.tol)?;
    let mut messages = vec![format!("dual: {dual}"), format!("classification: {}", classification.label)];
    let mut result = json!({
        "dual": dual.to_string(),
        "classification": classification.label,
        "dual_profile": classification,
        "self_dual": self_dual,
        "note": CLASSIFY_NOTE,
    });
    if opts.input.is_some() {
        let p = opts.dataset()?.problem()?;
        let x = evaluate(&dual, &p)?;
        result["allocations"] = json!(agent_rows(&p, x.values()));
        result["summary"] = json!(Summary::of(x.values()));
    }
    messages.push(format!("self-dual: {}", self_dual.is_self_dual));
    Ok(Outcome {
        report: opts.report("dual", &[rule], result),
        exit_code: 0,
        messages,
    })
}

pub fn cmd_extract(rule: &str, opts: &Options) -> Result<Outcome> {
    let rule = parse_rule(rule)?;
    let profile = profile_rule(&rule, &opts.grid()?, PROBE_AGENTS, PROBE_TOTAL_NEED)?;
    let result = json!({
        "probe_agents": PROBE_AGENTS,
        "probe_total_need": PROBE_TOTAL_NEED,
        "t": profile.grid,
        "a": profile.a_values,
        "b": profile.b_values,
    });
    Ok(Outcome::ok(opts.report("extract", &[rule], result)))
}

pub fn cmd_classify(rule: &str, opts: &Options) -> Result<Outcome> {
    let rule = parse_rule(rule)?;
    let c = classify(&rule, &opts.grid()?, &opts.sample_config(), opts.tol)?;
    let messages = vec![format!("classification: {} (residual {:e})", c.label, c.residual)];
    let result = json!({ "classification": c.label, "detail": c, "note": CLASSIFY_NOTE });
    Ok(Outcome {
        report: opts.report("classify", &[rule], result),
        exit_code: 0,
        messages,
    })
}

pub fn cmd_compare(rules: &str, opts: &Options) -> Result<Outcome> {
    let rules = parse_rule_list(rules)?;
    let p = opts.dataset()?.problem()?;
    let columns = rules
        .iter()
        .map(|r| evaluate(r, &p).map(|x| x.into_values()))
        .collect::<redistrib_core::Result<Vec<_>>>()?;
    let rows: Vec<Value> = (0..p.len())
        .map(|i| {
            let values: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            let cover: Vec<Option<f64>> = values.iter().map(|&x| coverage(x, p.needs()[i])).collect();
            json!({
                "id": p.agents()[i].as_str(),
                "income": p.incomes()[i],
                "need": p.needs()[i],
                "allocations": values,
                "coverage": cover,
            })
        })
        .collect();
    let summary: Vec<Value> = rules
        .iter()
        .zip(&columns)
        .map(|(r, c)| json!({ "rule": r.to_string(), "summary": Summary::of(c) }))
        .collect();
    let result = json!({ "allocations": rows, "summary": summary });
    Ok(Outcome::ok(opts.report("compare", &rules, result)))
}
