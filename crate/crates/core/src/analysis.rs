//! Recovering the `(A, B)` form of a black-box rule.
//!
//! A rule satisfying homogeneity, equal treatment, continuity and no
//! advantageous transfer pays
//!
//! ```text
//! x_i = Y/n + (y_i - Y/n) A(t) + (z_i - Z/n) B(t),   t = Y / Z
//! ```
//!
//! and flat problems pay `Y/n` to everybody. So `B(t)` is read off a probe
//! with flat incomes and one need moved between two agents, and `A(t)` off a
//! probe with flat needs and one income moved. Whether the rule really is of
//! this form is then checked by reconstructing it on fresh random problems.

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{axiom_suite, Axiom, AxiomReport};
use crate::error::{Error, Result};
use crate::problem::{max_abs_diff, Problem};
use crate::rules::{ensure_tolerance, evaluate, RuleSpec};
use crate::sampling::{SampleConfig, Sampler};
use crate::scalar::ScalarFn;

/// Agents used by the probes in [`classify`].
pub const PROBE_AGENTS: usize = 4;
/// Total need used by the probes in [`classify`].
pub const PROBE_TOTAL_NEED: f64 = 1.0;
/// Grid used by [`verify_characterization`].
pub const DEFAULT_GRID: [f64; 6] = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];

/// Which two agents carry the probe perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeAgents {
    pub n: usize,
    pub first: usize,
    pub second: usize,
}

impl ProbeAgents {
    pub fn new(n: usize) -> Self {
        ProbeAgents { n, first: 0, second: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbPoint {
    pub a: f64,
    pub b: f64,
}

/// `(a, b)` at `t` from probes with `Z = total_need`, `Y = t Z`, on `n`
/// agents with agents 0 and 1 perturbed.
pub fn extract_ab(rule: &RuleSpec, t: f64, total_need: f64, n: usize) -> Result<AbPoint> {
    extract_ab_with(rule, t, total_need, ProbeAgents::new(n))
}

pub fn extract_ab_with(rule: &RuleSpec, t: f64, total_need: f64, agents: ProbeAgents) -> Result<AbPoint> {
    let ProbeAgents { n, first, second } = agents;
    if n < 2 {
        return Err(Error::NotApplicable(n));
    }
    if first == second || first >= n || second >= n {
        return Err(Error::DegenerateProbe(format!(
            "agents ({first}, {second}) are not two distinct agents of {n}"
        )));
    }
    if !(t.is_finite() && total_need.is_finite() && total_need > 0.0) {
        return Err(Error::DegenerateProbe(format!("t = {t}, Z = {total_need}")));
    }
    let total_income = t * total_need;
    let nf = n as f64;
    let flat_income = vec![total_income / nf; n];
    let flat_need = vec![total_need / nf; n];

    let need_step = total_need / (2.0 * nf);
    let mut needs = flat_need.clone();
    needs[first] += need_step;
    needs[second] -= need_step;
    let b = probe(rule, flat_income.clone(), needs, first, |p| {
        p.needs()[first] - p.total_need() / nf
    })?;

    let income_step = total_income.abs() / (2.0 * nf) + 1.0;
    let mut incomes = flat_income;
    incomes[first] += income_step;
    incomes[second] -= income_step;
    let a = probe(rule, incomes, flat_need, first, |p| {
        p.incomes()[first] - p.total_income() / nf
    })?;

    Ok(AbPoint { a, b })
}

fn probe(
    rule: &RuleSpec,
    incomes: Vec<f64>,
    needs: Vec<f64>,
    agent: usize,
    deviation: impl Fn(&Problem) -> f64,
) -> Result<f64> {
    let p = Problem::from_profiles(incomes, needs).map_err(|e| Error::DegenerateProbe(e.to_string()))?;
    let dev = deviation(&p);
    if dev == 0.0 {
        return Err(Error::DegenerateProbe("probe deviation vanished".into()));
    }
    let x = evaluate(rule, &p)?;
    Ok((x[agent] - p.total_income() / p.len() as f64) / dev)
}

/// Sampled `A(t)`, `B(t)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbProfile {
    pub grid: Vec<f64>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
}

impl AbProfile {
    /// AB-form payoffs for `p` using the sampled coefficients at grid index `k`.
    pub fn reconstruct(&self, k: usize, p: &Problem) -> Vec<f64> {
        let n = p.len() as f64;
        let (a, b) = (self.a_values[k], self.b_values[k]);
        let mean_income = p.total_income() / n;
        let mean_need = p.total_need() / n;
        p.incomes()
            .iter()
            .zip(p.needs())
            .map(|(y, z)| mean_income + (y - mean_income) * a + (z - mean_need) * b)
            .collect()
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(t) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite point {t}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("points must be strictly increasing".into()));
    }
    Ok(())
}

/// Parses `lo:hi:step` into `lo, lo + step, ...` up to `hi` inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Error::InvalidGrid(format!("`{spec}` is not lo:hi:step")));
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::InvalidGrid(format!("`{s}` is not a finite number")))
    };
    grid_range(num(lo)?, num(hi)?, num(step)?)
}

pub fn grid_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidGrid("step must be positive".into()));
    }
    if hi < lo {
        return Err(Error::InvalidGrid("hi must not be below lo".into()));
    }
    let count = ((hi - lo) / step + 1e-9).floor() + 1.0;
    if count > 1e6 {
        return Err(Error::InvalidGrid(format!("{count} points is too many")));
    }
    Ok((0..count as usize).map(|k| lo + k as f64 * step).collect())
}

/// Extracts `(a, b)` at every grid point, with `Z = total_need`.
pub fn profile_rule(rule: &RuleSpec, grid: &[f64], n: usize, total_need: f64) -> Result<AbProfile> {
    validate_grid(grid)?;
    if !(total_need > 0.0 && total_need.is_finite()) {
        return Err(Error::DegenerateProbe(format!("Z = {total_need}")));
    }
    let points: Vec<AbPoint> = grid
        .par_iter()
        .map(|&t| extract_ab(rule, t, total_need, n))
        .collect::<Result<_>>()?;
    Ok(AbProfile {
        grid: grid.to_vec(),
        a_values: points.iter().map(|p| p.a).collect(),
        b_values: points.iter().map(|p| p.b).collect(),
    })
}

/// Recognized shape of a sampled coefficient function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", content = "value", rename_all = "snake_case")]
pub enum Shape {
    Zero,
    One,
    Identity,
    Constant(f64),
    /// `t -> c t`
    Linear(f64),
    Other,
}

impl Shape {
    pub fn to_scalar_fn(self) -> Option<ScalarFn> {
        Some(match self {
            Shape::Zero => ScalarFn::Constant(0.0),
            Shape::One => ScalarFn::Constant(1.0),
            Shape::Identity => ScalarFn::Identity,
            Shape::Constant(c) => ScalarFn::Constant(c),
            Shape::Linear(c) => ScalarFn::Scale(c),
            Shape::Other => return None,
        })
    }
}

fn near(v: f64, target: f64, tol: f64, t: f64) -> bool {
    (v - target).abs() <= tol * t.abs().max(1.0)
}

fn fit_constant(grid: &[f64], values: &[f64], tol: f64) -> Option<f64> {
    let c = values.iter().sum::<f64>() / values.len() as f64;
    grid.iter().zip(values).all(|(&t, &v)| near(v, c, tol, t)).then_some(c)
}

/// Classifies sampled `A` values as 0, 1, another constant, or other.
pub fn fit_a_shape(grid: &[f64], values: &[f64], tol: f64) -> Shape {
    let all = |target: f64| grid.iter().zip(values).all(|(&t, &v)| near(v, target, tol, t));
    if all(0.0) {
        Shape::Zero
    } else if all(1.0) {
        Shape::One
    } else if let Some(c) = fit_constant(grid, values, tol) {
        Shape::Constant(c)
    } else {
        Shape::Other
    }
}

/// Classifies sampled `B` values as 0, `t`, a constant, `c t`, or other.
pub fn fit_b_shape(grid: &[f64], values: &[f64], tol: f64) -> Shape {
    let zero = grid.iter().zip(values).all(|(&t, &v)| near(v, 0.0, tol, t));
    let identity = grid.iter().zip(values).all(|(&t, &v)| near(v, t, tol, t));
    if zero {
        return Shape::Zero;
    }
    if identity {
        return Shape::Identity;
    }
    if let Some(c) = fit_constant(grid, values, tol) {
        return if near(c, 1.0, tol, 1.0) { Shape::One } else { Shape::Constant(c) };
    }
    let tt: f64 = grid.iter().map(|t| t * t).sum();
    if tt > 0.0 {
        let c = grid.iter().zip(values).map(|(t, v)| t * v).sum::<f64>() / tt;
        if grid.iter().zip(values).all(|(&t, &v)| near(v, c * t, tol, t)) {
            return Shape::Linear(c);
        }
    }
    Shape::Other
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    #[serde(rename = "laissez-faire")]
    LaissezFaire,
    #[serde(rename = "proportional")]
    Proportional,
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "need-adjusted-full")]
    NeedAdjustedFull,
    #[serde(rename = "generic-AB")]
    GenericAb,
    #[serde(rename = "non-AB")]
    NonAb,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::LaissezFaire => "laissez-faire",
            Label::Proportional => "proportional",
            Label::Full => "full",
            Label::NeedAdjustedFull => "need-adjusted-full",
            Label::GenericAb => "generic-AB",
            Label::NonAb => "non-AB",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`classify`]. Labels are statements about the sampled grid and
/// problems only; they are consistent with, not proofs of, membership.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: Label,
    pub a_shape: Shape,
    pub b_shape: Shape,
    pub profile: AbProfile,
    /// Worst AB reconstruction error on fresh problems, divided by
    /// `max(1, |Y|, Z)`.
    pub residual: f64,
    pub tolerance: f64,
    pub trials: usize,
}

impl Classification {
    pub fn is_ab(&self) -> bool {
        self.label != Label::NonAb
    }

    /// AB rule built from recognized shapes, when both were recognized.
    pub fn fitted_rule(&self) -> Option<RuleSpec> {
        if !self.is_ab() {
            return None;
        }
        Some(RuleSpec::Ab {
            a: self.a_shape.to_scalar_fn()?,
            b: self.b_shape.to_scalar_fn()?,
        })
    }
}

fn validate_classification_grid(grid: &[f64]) -> Result<()> {
    validate_grid(grid)?;
    if grid.len() < 5 {
        return Err(Error::InvalidGrid("classification needs at least 5 points".into()));
    }
    let has_negative = grid.iter().any(|&t| t < -1e-9);
    let has_zero = grid.iter().any(|&t| t.abs() <= 1e-9);
    let has_positive = grid.iter().any(|&t| t > 1e-9);
    if !(has_negative && has_zero && has_positive) {
        return Err(Error::InvalidGrid(
            "classification grid must contain negative, zero and positive points".into(),
        ));
    }
    Ok(())
}

/// Worst reconstruction error of `profile` against `rule` on `cfg.trials`
/// fresh problems, cycling through the grid ratios.
pub fn reconstruction_residual(rule: &RuleSpec, profile: &AbProfile, cfg: &SampleConfig, tag: &str) -> Result<f64> {
    cfg.validate()?;
    if cfg.n_range.1 < 2 {
        return Err(Error::InvalidConfig("reconstruction needs problems with two agents".into()));
    }
    let sampler = Sampler::new(cfg, tag);
    let grid = &profile.grid;
    let residuals: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let idx = k % grid.len();
            let p = sampler.problem_with_ratio(&mut sampler.trial_rng(k), 2, grid[idx]);
            let x = evaluate(rule, &p)?;
            Ok(max_abs_diff(x.values(), &profile.reconstruct(idx, &p)) / p.magnitude())
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Profiles `rule`, fits coefficient shapes, and checks the AB form on fresh
/// problems. Anything that does not reconstruct within `tol` is `NonAb`.
pub fn classify(rule: &RuleSpec, grid: &[f64], cfg: &SampleConfig, tol: f64) -> Result<Classification> {
    ensure_tolerance(tol)?;
    validate_classification_grid(grid)?;
    let profile = profile_rule(rule, grid, PROBE_AGENTS, PROBE_TOTAL_NEED)?;
    let a_shape = fit_a_shape(&profile.grid, &profile.a_values, tol);
    let b_shape = fit_b_shape(&profile.grid, &profile.b_values, tol);
    let residual = reconstruction_residual(rule, &profile, cfg, "classify")?;
    let label = if residual > tol {
        Label::NonAb
    } else {
        match (a_shape, b_shape) {
            (Shape::One, Shape::Zero) => Label::LaissezFaire,
            (Shape::Zero, Shape::Identity) => Label::Proportional,
            (Shape::Zero, Shape::Zero) => Label::Full,
            (Shape::Zero, Shape::One) => Label::NeedAdjustedFull,
            _ => Label::GenericAb,
        }
    };
    Ok(Classification {
        label,
        a_shape,
        b_shape,
        profile,
        residual,
        tolerance: tol,
        trials: cfg.trials,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Implication {
    pub name: &'static str,
    pub premises: Vec<Axiom>,
    /// All premises passed.
    pub fired: bool,
    /// `!fired || conclusion`.
    pub held: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterizationReport {
    pub rule: RuleSpec,
    pub axioms: Vec<AxiomReport>,
    pub classification: Classification,
    pub implications: Vec<Implication>,
    /// False means the axiom checker and the classifier disagree somewhere.
    pub consistent: bool,
}

const CHARACTERIZATION_AXIOMS: [Axiom; 6] = [
    Axiom::Homogeneity,
    Axiom::EqualTreatment,
    Axiom::Continuity,
    Axiom::Nat,
    Axiom::Stability,
    Axiom::Dummy,
];

/// Runs the axiom suite and the classifier, then checks that every
/// characterization whose axioms passed agrees with the recovered shape.
pub fn verify_characterization(rule: &RuleSpec, cfg: &SampleConfig, tol: f64) -> Result<CharacterizationReport> {
    let axioms = axiom_suite(rule, &CHARACTERIZATION_AXIOMS, cfg, tol)?;
    let classification = classify(rule, &DEFAULT_GRID, cfg, tol)?;
    let passed = |a: Axiom| axioms.iter().any(|r| r.axiom == a && r.passed);

    let profile = &classification.profile;
    let afam_shape = profile
        .grid
        .iter()
        .zip(&profile.a_values)
        .zip(&profile.b_values)
        .all(|((&t, &a), &b)| near(b, (1.0 - a) * t, tol, t));
    let label = classification.label;

    let core_nat = [Axiom::Homogeneity, Axiom::EqualTreatment, Axiom::Continuity, Axiom::Nat];
    let with = |extra: &[Axiom]| -> Vec<Axiom> { core_nat.iter().chain(extra).copied().collect() };
    let candidates: [(&'static str, Vec<Axiom>, bool); 4] = [
        (
            "core+nat+stability+dummy => laissez-faire or proportional",
            with(&[Axiom::Stability, Axiom::Dummy]),
            matches!(label, Label::LaissezFaire | Label::Proportional),
        ),
        (
            "core+nat+stability => laissez-faire or A = 0",
            with(&[Axiom::Stability]),
            label == Label::LaissezFaire || (classification.is_ab() && classification.a_shape == Shape::Zero),
        ),
        (
            "core+nat+dummy => B(t) = (1 - A(t)) t",
            with(&[Axiom::Dummy]),
            classification.is_ab() && afam_shape,
        ),
        ("core+nat => AB family", with(&[]), classification.is_ab()),
    ];
    let implications: Vec<Implication> = candidates
        .into_iter()
        .map(|(name, premises, conclusion)| {
            let fired = premises.iter().all(|&a| passed(a));
            Implication {
                name,
                premises,
                fired,
                held: !fired || conclusion,
            }
        })
        .collect();
    let consistent = implications.iter().all(|i| i.held);
    Ok(CharacterizationReport {
        rule: rule.clone(),
        axioms,
        classification,
        implications,
        consistent,
    })
}
