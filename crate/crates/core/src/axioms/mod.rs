//! Seeded, sampled checkers for the axioms on redistribution rules.
//!
//! Each check draws `trials` independent trials from a stream derived from
//! the config seed and the axiom name, stops at the first violation in trial
//! order, and shrinks it into a small re-runnable [`Witness`]. Trials run in
//! parallel; the report is identical to a sequential run.

mod witness;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use witness::{Outcome, Witness, CONTINUITY_STEPS, SHRINK_ROUNDS};

use crate::error::{Error, Result};
use crate::rules::{ensure_tolerance, RuleSpec};
use crate::sampling::{SampleConfig, Sampler};

/// Default absolute tolerance, multiplied by `max(1, |Y|, Z)` per trial.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Homogeneity,
    EqualTreatment,
    Continuity,
    /// No advantageous transfer.
    Nat,
    Stability,
    Dummy,
    IncomeAdditivity,
    DualIncomeAdditivity,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Homogeneity,
        Axiom::EqualTreatment,
        Axiom::Continuity,
        Axiom::Nat,
        Axiom::Stability,
        Axiom::Dummy,
        Axiom::IncomeAdditivity,
        Axiom::DualIncomeAdditivity,
    ];

    pub const CORE: [Axiom; 3] = [Axiom::Homogeneity, Axiom::EqualTreatment, Axiom::Continuity];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Homogeneity => "homogeneity",
            Axiom::EqualTreatment => "equal_treatment",
            Axiom::Continuity => "continuity",
            Axiom::Nat => "nat",
            Axiom::Stability => "stability",
            Axiom::Dummy => "dummy",
            Axiom::IncomeAdditivity => "income_additivity",
            Axiom::DualIncomeAdditivity => "dual_income_additivity",
        }
    }

    /// Agents a trial needs: pairs, coalitions and dummies need two.
    pub fn min_agents(self) -> usize {
        match self {
            Axiom::EqualTreatment | Axiom::Nat | Axiom::Dummy => 2,
            _ => 1,
        }
    }

    /// The axiom a rule's dual satisfies whenever the rule satisfies `self`.
    pub fn dual(self) -> Axiom {
        match self {
            Axiom::IncomeAdditivity => Axiom::DualIncomeAdditivity,
            Axiom::DualIncomeAdditivity => Axiom::IncomeAdditivity,
            other => other,
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAxiom(s.to_owned()))
    }
}

/// Parses a comma list of axiom names. `all` expands to every axiom and
/// `core` to homogeneity, equal treatment and continuity. Duplicates are
/// dropped, first occurrence wins.
pub fn parse_axioms(list: &str) -> Result<Vec<Axiom>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let expanded: Vec<Axiom> = match name {
            "all" => Axiom::ALL.to_vec(),
            "core" => Axiom::CORE.to_vec(),
            other => vec![other.parse()?],
        };
        for a in expanded {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownAxiom(list.to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// Index of the first violating trial.
    pub trial: usize,
    pub witness: Witness,
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    pub deviation: f64,
    /// `tol * max(1, |Y|, Z)` for the shrunk witness.
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub rule: RuleSpec,
    pub passed: bool,
    pub trials_run: usize,
    pub tolerance: f64,
    pub counterexample: Option<Counterexample>,
}

impl AxiomReport {
    /// Replays the counterexample; `Some(true)` means it still violates.
    pub fn recheck(&self) -> Option<Result<bool>> {
        self.counterexample.as_ref().map(|c| {
            c.witness
                .evaluate(&self.rule)
                .map(|o| o.violates(self.tolerance))
        })
    }
}

/// Runs the sampled predicate for `axiom` against `rule`.
pub fn check_axiom(axiom: Axiom, rule: &RuleSpec, cfg: &SampleConfig, tol: f64) -> Result<AxiomReport> {
    ensure_tolerance(tol)?;
    cfg.validate()?;
    if cfg.n_range.1 < axiom.min_agents() {
        return Err(Error::InvalidConfig(format!(
            "{axiom} needs problems with at least {} agents",
            axiom.min_agents()
        )));
    }
    let sampler = Sampler::new(cfg, axiom.name());
    let first_failure = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampler.trial_rng(k);
            let w = Witness::sample(axiom, &sampler, &mut rng);
            let verdict = w
                .evaluate(rule)
                .map(|o| o.violates(tol).then_some((w, o)));
            (k, verdict)
        })
        .find_first(|(_, v)| !matches!(v, Ok(None)));

    let mut report = AxiomReport {
        axiom,
        rule: rule.clone(),
        passed: true,
        trials_run: cfg.trials,
        tolerance: tol,
        counterexample: None,
    };
    if let Some((trial, verdict)) = first_failure {
        let (w, outcome) = verdict?.expect("failures carry a witness");
        let (witness, outcome) = w.shrink(outcome, rule, tol);
        report.passed = false;
        report.trials_run = trial + 1;
        report.counterexample = Some(Counterexample {
            trial,
            threshold: outcome.threshold(tol),
            expected: outcome.expected,
            observed: outcome.observed,
            deviation: outcome.deviation,
            witness,
        });
    }
    Ok(report)
}

/// Name-based entry point; unknown names are `UnknownAxiom`.
pub fn check_axiom_named(name: &str, rule: &RuleSpec, cfg: &SampleConfig, tol: f64) -> Result<AxiomReport> {
    check_axiom(name.parse()?, rule, cfg, tol)
}

/// One report per axiom, each on its own sub-stream.
pub fn axiom_suite(rule: &RuleSpec, axioms: &[Axiom], cfg: &SampleConfig, tol: f64) -> Result<Vec<AxiomReport>> {
    axioms.iter().map(|&a| check_axiom(a, rule, cfg, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Problem;
    use crate::scalar::ScalarFn;

    fn cfg(trials: usize) -> SampleConfig {
        SampleConfig::default().with_trials(trials)
    }

    #[test]
    fn parses_names_and_groups() {
        assert_eq!(parse_axioms("all").unwrap(), Axiom::ALL.to_vec());
        assert_eq!(
            parse_axioms("core, nat,homogeneity").unwrap(),
            vec![Axiom::Homogeneity, Axiom::EqualTreatment, Axiom::Continuity, Axiom::Nat]
        );
        assert_eq!(
            parse_axioms("dummy,bogus"),
            Err(Error::UnknownAxiom("bogus".into()))
        );
        assert!(parse_axioms("").is_err());
        for a in Axiom::ALL {
            assert_eq!(a.name().parse::<Axiom>().unwrap(), a);
        }
    }

    #[test]
    fn dummy_fails_for_full_on_fixed_problem() {
        let p = Problem::from_profiles(vec![0.0, 4.0], vec![0.0, 2.0]).unwrap();
        let o = Witness::Dummy { problem: p, agent: 0 }
            .evaluate(&RuleSpec::Full)
            .unwrap();
        assert_eq!(o.observed, vec![2.0]);
        assert!(o.violates(DEFAULT_TOLERANCE));
    }

    #[test]
    fn stability_fails_for_half_afam_on_fixed_problem() {
        let p = Problem::from_profiles(vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
        let o = Witness::Stability { problem: p }
            .evaluate(&RuleSpec::AFamily(ScalarFn::Constant(0.5)))
            .unwrap();
        assert_eq!(o.expected, vec![3.25, 2.75]);
        assert_eq!(o.observed, vec![2.375, 3.625]);
        assert_eq!(o.deviation, 0.875);
    }

    #[test]
    fn nat_holds_for_prop_on_fixed_reallocation() {
        let p = Problem::from_profiles(vec![5.0, 1.0, 2.0], vec![1.0, 3.0, 2.0]).unwrap();
        let q = Problem::from_profiles(vec![-1.0, 7.0, 2.0], vec![4.0, 0.0, 2.0]).unwrap();
        let w = Witness::Nat {
            problem: p,
            reallocated: q,
            coalition: vec![0, 1],
        };
        let o = w.evaluate(&RuleSpec::Proportional).unwrap();
        assert!(!o.violates(DEFAULT_TOLERANCE));
        assert!((o.expected[0] - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn continuity_flags_a_jump() {
        // A(t) jumps from 0 to 1 at t = 1.5; approach from below.
        let step = RuleSpec::AFamily(ScalarFn::custom("step", |t| if t >= 1.5 { 1.0 } else { 0.0 }));
        let p = Problem::from_profiles(vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
        let w = Witness::Continuity {
            problem: p.clone(),
            income_direction: vec![-1.0, 0.0],
            need_direction: vec![0.0, 0.0],
            scale: 1e-2,
            steps: CONTINUITY_STEPS,
        };
        let o = w.evaluate(&step).unwrap();
        assert!(o.violates(DEFAULT_TOLERANCE));
        assert!(o.deviation > 1.0);
        let smooth = w.evaluate(&RuleSpec::AFamily(ScalarFn::Identity)).unwrap();
        assert!(!smooth.violates(DEFAULT_TOLERANCE));
    }

    #[test]
    fn sampled_checks_on_catalog_rules() {
        let c = cfg(200);
        for a in Axiom::ALL {
            assert!(check_axiom(a, &RuleSpec::Proportional, &c, DEFAULT_TOLERANCE).unwrap().passed, "prop {a}");
            assert!(check_axiom(a, &RuleSpec::LaissezFaire, &c, DEFAULT_TOLERANCE).unwrap().passed, "lf {a}");
        }
        let r = check_axiom(Axiom::Dummy, &RuleSpec::Full, &c, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.passed);
        assert_eq!(r.recheck(), Some(Ok(true)));
        let cx = r.counterexample.unwrap();
        assert!(cx.deviation > cx.threshold);
        assert_eq!(r.trials_run, cx.trial + 1);
    }

    #[test]
    fn failures_shrink_to_small_witnesses() {
        let r = check_axiom(Axiom::Dummy, &RuleSpec::Full, &cfg(50), DEFAULT_TOLERANCE).unwrap();
        // FULL pays Y/n to the dummy: one other agent remains.
        assert_eq!(r.counterexample.unwrap().witness.problem().len(), 2);
        let r = check_axiom(
            Axiom::Stability,
            &RuleSpec::AFamily(ScalarFn::Constant(0.5)),
            &cfg(50),
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.recheck(), Some(Ok(true)));
    }

    #[test]
    fn reports_are_deterministic() {
        let rule = RuleSpec::AFamily(ScalarFn::Constant(0.5));
        let a = axiom_suite(&rule, &Axiom::ALL, &cfg(100), DEFAULT_TOLERANCE).unwrap();
        let b = axiom_suite(&rule, &Axiom::ALL, &cfg(100), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // Sub-seeds depend on the axiom, not its position in the list.
        let single = check_axiom(Axiom::Stability, &rule, &cfg(100), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(&a[4]).unwrap()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = cfg(10);
        assert!(matches!(
            check_axiom_named("fairness", &RuleSpec::Full, &c, 1e-9),
            Err(Error::UnknownAxiom(_))
        ));
        assert!(matches!(
            check_axiom(Axiom::Dummy, &RuleSpec::Full, &c, -1.0),
            Err(Error::InvalidTolerance(_))
        ));
        let single = SampleConfig { n_range: (1, 1), ..c };
        assert!(matches!(
            check_axiom(Axiom::Nat, &RuleSpec::Full, &single, 1e-9),
            Err(Error::InvalidConfig(_))
        ));
        assert!(check_axiom(Axiom::Stability, &RuleSpec::Full, &single, 1e-9).unwrap().passed);
    }
}
