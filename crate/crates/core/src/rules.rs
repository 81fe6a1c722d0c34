//! Concrete rules and the parameterized families, behind one `evaluate`.
//!
//! Every family shares the ratio `t = Y / Z`, computed once per problem.
//! `DUAL(r)` is evaluated lazily through [`crate::duality::dual_evaluate`].

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::duality;
use crate::error::{Error, Result};
use crate::problem::{max_abs_diff, Allocation, Problem};
use crate::scalar::ScalarFn;

type BoxedRule = Arc<dyn Fn(&Problem) -> Vec<f64> + Send + Sync>;

/// A rule supplied as code rather than as a catalog member.
#[derive(Clone)]
pub struct CustomRule {
    name: String,
    f: BoxedRule,
}

impl CustomRule {
    pub fn new(name: impl Into<String>, f: impl Fn(&Problem) -> Vec<f64> + Send + Sync + 'static) -> Self {
        CustomRule {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomRule({})", self.name)
    }
}

impl PartialEq for CustomRule {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// Named, parameterized description of a rule.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    /// `x_i = y_i`
    LaissezFaire,
    /// `x_i = Y / n`
    Full,
    /// `x_i = (z_i / Z) Y`
    Proportional,
    /// `x_i = z_i + (Y - Z) / n`
    NeedAdjustedFull,
    /// `x_i = Y/n + (y_i - Y/n) A(t) + (z_i - Z/n) B(t)`
    Ab { a: ScalarFn, b: ScalarFn },
    /// `x_i = A(t) y_i + (1 - A(t)) t z_i`
    AFamily(ScalarFn),
    /// `Ab` with `A = 0`.
    BFamily(ScalarFn),
    /// `a1 * LF + a2 * PROP + (1 - a1 - a2) * FULL`
    Linear { alpha1: f64, alpha2: f64 },
    /// `a1 * LF + a2 * PROP + (1 - a1 - a2) * NAFR`
    LinearDual { alpha1: f64, alpha2: f64 },
    /// `weight * first + (1 - weight) * second`, weight in `[0, 1]`.
    Convex {
        first: Box<RuleSpec>,
        second: Box<RuleSpec>,
        weight: f64,
    },
    Dual(Box<RuleSpec>),
    Custom(CustomRule),
}

impl RuleSpec {
    pub fn ab(a: ScalarFn, b: ScalarFn) -> Self {
        RuleSpec::Ab { a, b }
    }

    pub fn linear(alpha1: f64, alpha2: f64) -> Self {
        RuleSpec::Linear { alpha1, alpha2 }
    }

    pub fn linear_dual(alpha1: f64, alpha2: f64) -> Self {
        RuleSpec::LinearDual { alpha1, alpha2 }
    }

    /// Checked constructor; rejects weights outside `[0, 1]`.
    pub fn convex(first: RuleSpec, second: RuleSpec, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(RuleSpec::Convex {
            first: Box::new(first),
            second: Box::new(second),
            weight,
        })
    }

    pub fn dual(inner: RuleSpec) -> Self {
        RuleSpec::Dual(Box::new(inner))
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(&Problem) -> Vec<f64> + Send + Sync + 'static) -> Self {
        RuleSpec::Custom(CustomRule::new(name, f))
    }

    /// True when the spec (recursively) avoids custom code and so round-trips
    /// through the grammar.
    pub fn is_representable(&self) -> bool {
        match self {
            RuleSpec::Ab { a, b } => !a.is_custom() && !b.is_custom(),
            RuleSpec::AFamily(f) | RuleSpec::BFamily(f) => !f.is_custom(),
            RuleSpec::Convex { first, second, .. } => {
                first.is_representable() && second.is_representable()
            }
            RuleSpec::Dual(inner) => inner.is_representable(),
            RuleSpec::Custom(_) => false,
            _ => true,
        }
    }

    /// Grammar string, or `NonRepresentable` for custom parts.
    pub fn to_grammar(&self) -> Result<String> {
        if self.is_representable() {
            Ok(self.to_string())
        } else {
            Err(Error::NonRepresentable(self.to_string()))
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::LaissezFaire => f.write_str("lf"),
            RuleSpec::Full => f.write_str("full"),
            RuleSpec::Proportional => f.write_str("prop"),
            RuleSpec::NeedAdjustedFull => f.write_str("nafr"),
            RuleSpec::Ab { a, b } => write!(f, "ab:A={a},B={b}"),
            RuleSpec::AFamily(a) => write!(f, "afam:A={a}"),
            RuleSpec::BFamily(b) => write!(f, "bfam:B={b}"),
            RuleSpec::Linear { alpha1, alpha2 } => write!(f, "lin:{alpha1},{alpha2}"),
            RuleSpec::LinearDual { alpha1, alpha2 } => write!(f, "lindual:{alpha1},{alpha2}"),
            RuleSpec::Convex {
                first,
                second,
                weight,
            } => write!(f, "convex({first};{second};{weight})"),
            RuleSpec::Dual(inner) => write!(f, "dual({inner})"),
            RuleSpec::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl Serialize for RuleSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

static EVALUATIONS: AtomicU64 = AtomicU64::new(0);
static IMBALANCED: AtomicU64 = AtomicU64::new(0);

/// Process-wide counters over every [`evaluate`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationStats {
    pub evaluations: u64,
    pub imbalanced: u64,
}

pub fn evaluation_stats() -> EvaluationStats {
    EvaluationStats {
        evaluations: EVALUATIONS.load(Ordering::Relaxed),
        imbalanced: IMBALANCED.load(Ordering::Relaxed),
    }
}

/// Applies `rule` to `p`. The result always satisfies the balance condition;
/// anything else is reported as [`Error::Imbalance`].
pub fn evaluate(rule: &RuleSpec, p: &Problem) -> Result<Allocation> {
    EVALUATIONS.fetch_add(1, Ordering::Relaxed);
    let values = raw_values(rule, p)?;
    let alloc = Allocation::new(p, values);
    if matches!(alloc, Err(Error::Imbalance { .. })) {
        IMBALANCED.fetch_add(1, Ordering::Relaxed);
    }
    alloc
}

fn ensure_coefficient(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            field: "rule coefficient",
            index: 0,
        })
    }
}

fn ab_values(p: &Problem, a: f64, b: f64) -> Vec<f64> {
    let n = p.len() as f64;
    let mean_income = p.total_income() / n;
    let mean_need = p.total_need() / n;
    p.incomes()
        .iter()
        .zip(p.needs())
        .map(|(y, z)| mean_income + (y - mean_income) * a + (z - mean_need) * b)
        .collect()
}

fn raw_values(rule: &RuleSpec, p: &Problem) -> Result<Vec<f64>> {
    let n = p.len() as f64;
    let total_income = p.total_income();
    let total_need = p.total_need();
    let t = p.ratio();
    Ok(match rule {
        RuleSpec::LaissezFaire => p.incomes().to_vec(),
        RuleSpec::Full => vec![total_income / n; p.len()],
        RuleSpec::Proportional => p.needs().iter().map(|z| z / total_need * total_income).collect(),
        RuleSpec::NeedAdjustedFull => {
            let shift = (total_income - total_need) / n;
            p.needs().iter().map(|z| z + shift).collect()
        }
        RuleSpec::Ab { a, b } => ab_values(p, a.eval(t), b.eval(t)),
        RuleSpec::BFamily(b) => ab_values(p, 0.0, b.eval(t)),
        RuleSpec::AFamily(a) => {
            let a = a.eval(t);
            p.incomes()
                .iter()
                .zip(p.needs())
                .map(|(y, z)| a * y + (1.0 - a) * t * z)
                .collect()
        }
        RuleSpec::Linear { alpha1, alpha2 } => {
            ensure_coefficient(*alpha1)?;
            ensure_coefficient(*alpha2)?;
            let rest = 1.0 - alpha1 - alpha2;
            p.incomes()
                .iter()
                .zip(p.needs())
                .map(|(y, z)| alpha1 * y + alpha2 * (z / total_need) * total_income + rest * total_income / n)
                .collect()
        }
        RuleSpec::LinearDual { alpha1, alpha2 } => {
            ensure_coefficient(*alpha1)?;
            ensure_coefficient(*alpha2)?;
            let rest = 1.0 - alpha1 - alpha2;
            let shift = (total_income - total_need) / n;
            p.incomes()
                .iter()
                .zip(p.needs())
                .map(|(y, z)| alpha1 * y + alpha2 * (z / total_need) * total_income + rest * (z + shift))
                .collect()
        }
        RuleSpec::Convex {
            first,
            second,
            weight,
        } => {
            if !(0.0..=1.0).contains(weight) {
                return Err(Error::InvalidWeight(*weight));
            }
            let x1 = evaluate(first, p)?;
            let x2 = evaluate(second, p)?;
            x1.values()
                .iter()
                .zip(x2.values())
                .map(|(u, v)| weight * u + (1.0 - weight) * v)
                .collect()
        }
        RuleSpec::Dual(inner) => duality::dual_evaluate(inner, p)?.into_values(),
        RuleSpec::Custom(c) => {
            let out = (c.f)(p);
            if out.len() != p.len() {
                return Err(Error::LengthMismatch {
                    expected: p.len(),
                    found: out.len(),
                });
            }
            out
        }
    })
}

/// Outcome of [`equivalent_on`].
#[derive(Debug, Clone, Serialize)]
pub struct Equivalence {
    pub passed: bool,
    /// Largest raw payoff difference seen.
    pub max_deviation: f64,
    /// Problem with the largest deviation relative to its tolerance.
    pub witness: Option<Problem>,
    pub tolerance: f64,
    pub problems: usize,
}

pub(crate) fn ensure_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Compares two rules on every problem. A problem passes when the max-norm
/// difference is at most `tol * max(1, |Y|, Z)`.
pub fn equivalent_on(first: &RuleSpec, second: &RuleSpec, problems: &[Problem], tol: f64) -> Result<Equivalence> {
    ensure_tolerance(tol)?;
    let mut passed = true;
    let mut max_deviation: f64 = 0.0;
    let mut worst: Option<(f64, &Problem)> = None;
    for p in problems {
        let x1 = evaluate(first, p)?;
        let x2 = evaluate(second, p)?;
        let dev = max_abs_diff(x1.values(), x2.values());
        let ratio = dev / (tol * p.magnitude());
        if ratio > 1.0 {
            passed = false;
        }
        max_deviation = max_deviation.max(dev);
        if worst.is_none_or(|(r, _)| ratio > r) {
            worst = Some((ratio, p));
        }
    }
    Ok(Equivalence {
        passed,
        max_deviation,
        witness: worst.map(|(_, p)| p.clone()),
        tolerance: tol,
        problems: problems.len(),
    })
}
