//! The dual-rule operator `R^d(y, z) = z - R(z - y, z)`.
//!
//! Duals are evaluated lazily for arbitrary rules. For catalog rules a
//! closed form is also available ([`closed_form_dual`]); the two must agree.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::problem::{max_abs_diff, Allocation, Problem};
use crate::rules::{ensure_tolerance, evaluate, RuleSpec};
use crate::sampling::{SampleConfig, Sampler};
use crate::scalar::ScalarFn;

/// `z - R(z - y, z)`, componentwise.
pub fn dual_evaluate(rule: &RuleSpec, p: &Problem) -> Result<Allocation> {
    let gaps: Vec<f64> = p.needs().iter().zip(p.incomes()).map(|(z, y)| z - y).collect();
    let mirrored = p.with_incomes(gaps)?;
    let x = evaluate(rule, &mirrored)?;
    let values = p.needs().iter().zip(x.values()).map(|(z, v)| z - v).collect();
    Allocation::new(p, values)
}

/// Dual coefficients of an AB rule: `A_d(t) = A(1 - t)` and
/// `B_d(t) = 1 - A(1 - t) - B(1 - t)`.
///
/// Catalog inputs stay in the catalog (everything there is a polynomial);
/// custom inputs yield custom composites.
pub fn dual_ab(a: &ScalarFn, b: &ScalarFn) -> (ScalarFn, ScalarFn) {
    let a_reflected = a.reflect();
    let b_reflected = b.reflect();
    let b_dual = ScalarFn::complement(1.0, &a_reflected, &b_reflected);
    (a_reflected, b_dual)
}

/// AFAM(A) written in AB form: `B(t) = (1 - A(t)) t`.
fn afam_as_ab(a: &ScalarFn) -> ScalarFn {
    match a.coefficients() {
        Some(c) => {
            let mut out = vec![0.0; c.len() + 1];
            out[1] = 1.0;
            for (k, v) in c.iter().enumerate() {
                out[k + 1] -= v;
            }
            ScalarFn::from_coefficients(out)
        }
        None => {
            let a = a.clone();
            ScalarFn::custom("afam-b", move |t| (1.0 - a.eval(t)) * t)
        }
    }
}

/// Closed-form dual of a catalog rule, `None` for custom rules.
pub fn closed_form_dual(rule: &RuleSpec) -> Option<RuleSpec> {
    Some(match rule {
        RuleSpec::LaissezFaire => RuleSpec::LaissezFaire,
        RuleSpec::Proportional => RuleSpec::Proportional,
        RuleSpec::Full => RuleSpec::NeedAdjustedFull,
        RuleSpec::NeedAdjustedFull => RuleSpec::Full,
        RuleSpec::Ab { a, b } => {
            let (a, b) = dual_ab(a, b);
            RuleSpec::Ab { a, b }
        }
        RuleSpec::BFamily(b) => {
            let (a, b) = dual_ab(&ScalarFn::Constant(0.0), b);
            match a {
                ScalarFn::Constant(0.0) => RuleSpec::BFamily(b),
                a => RuleSpec::Ab { a, b },
            }
        }
        RuleSpec::AFamily(a) => {
            let (a, b) = dual_ab(a, &afam_as_ab(a));
            RuleSpec::Ab { a, b }
        }
        RuleSpec::Linear { alpha1, alpha2 } => RuleSpec::LinearDual {
            alpha1: *alpha1,
            alpha2: *alpha2,
        },
        RuleSpec::LinearDual { alpha1, alpha2 } => RuleSpec::Linear {
            alpha1: *alpha1,
            alpha2: *alpha2,
        },
        RuleSpec::Convex {
            first,
            second,
            weight,
        } => RuleSpec::Convex {
            first: Box::new(closed_form_dual(first)?),
            second: Box::new(closed_form_dual(second)?),
            weight: *weight,
        },
        RuleSpec::Dual(inner) => (**inner).clone(),
        RuleSpec::Custom(_) => return None,
    })
}

/// Outcome of [`check_self_dual`].
#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub rule: RuleSpec,
    pub is_self_dual: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub trials: usize,
    /// Problem with the largest deviation relative to its tolerance.
    pub witness: Option<Problem>,
}

/// Compares `R` with `R^d` on `cfg.trials` sampled problems.
pub fn check_self_dual(rule: &RuleSpec, cfg: &SampleConfig, tol: f64) -> Result<DualReport> {
    ensure_tolerance(tol)?;
    cfg.validate()?;
    let sampler = Sampler::new(cfg, "self-dual");
    let outcomes: Vec<(f64, f64, Problem)> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampler.trial_rng(k);
            let p = sampler.problem(&mut rng, cfg.n_range.0);
            let direct = evaluate(rule, &p)?;
            let dual = dual_evaluate(rule, &p)?;
            let dev = max_abs_diff(direct.values(), dual.values());
            Ok((dev, dev / (tol * p.magnitude()), p))
        })
        .collect::<Result<_>>()?;

    let max_deviation = outcomes.iter().map(|o| o.0).fold(0.0, f64::max);
    let worst = outcomes
        .into_iter()
        .reduce(|best, o| if o.1 > best.1 { o } else { best });
    let is_self_dual = worst.as_ref().is_none_or(|w| w.1 <= 1.0);
    Ok(DualReport {
        rule: rule.clone(),
        is_self_dual,
        max_deviation,
        tolerance: tol,
        trials: cfg.trials,
        witness: worst.filter(|w| w.1 > 1.0).map(|w| w.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Problem {
        Problem::from_profiles(vec![5.0, 1.0], vec![1.0, 3.0]).unwrap()
    }

    #[test]
    fn dual_of_full_on_example_is_nafr() {
        let p = example();
        // z - y = (-4, 2); FULL gives (-1, -1); dual = (2, 4).
        assert_eq!(dual_evaluate(&RuleSpec::Full, &p).unwrap().values(), &[2.0, 4.0]);
        assert_eq!(
            evaluate(&RuleSpec::NeedAdjustedFull, &p).unwrap().values(),
            &[2.0, 4.0]
        );
    }

    #[test]
    fn prop_and_lf_duals_on_example() {
        let p = example();
        // PROP(z - y, z) = (-0.5, -1.5); dual = (1.5, 4.5).
        assert_eq!(dual_evaluate(&RuleSpec::Proportional, &p).unwrap().values(), &[1.5, 4.5]);
        assert_eq!(dual_evaluate(&RuleSpec::LaissezFaire, &p).unwrap().values(), &[5.0, 1.0]);
    }

    #[test]
    fn dual_ab_catalog_examples() {
        let zero = ScalarFn::Constant(0.0);
        let one = ScalarFn::Constant(1.0);
        assert_eq!(dual_ab(&one, &zero), (one.clone(), zero.clone()));
        assert_eq!(dual_ab(&zero, &ScalarFn::Identity), (zero.clone(), ScalarFn::Identity));
        assert_eq!(dual_ab(&zero, &zero), (zero.clone(), one.clone()));
    }

    #[test]
    fn dual_ab_handles_custom_functions() {
        let a = ScalarFn::custom("sq", |t| t * t);
        let (ad, bd) = dual_ab(&a, &ScalarFn::Identity);
        assert!(ad.is_custom() && bd.is_custom());
        // A(1 - 3) = 4; B_d(3) = 1 - 4 - (1 - 3) = -1
        assert_eq!(ad.eval(3.0), 4.0);
        assert_eq!(bd.eval(3.0), -1.0);
    }

    #[test]
    fn closed_forms_for_named_rules() {
        assert_eq!(closed_form_dual(&RuleSpec::Full), Some(RuleSpec::NeedAdjustedFull));
        assert_eq!(closed_form_dual(&RuleSpec::Proportional), Some(RuleSpec::Proportional));
        assert_eq!(
            closed_form_dual(&RuleSpec::linear(0.3, 0.2)),
            Some(RuleSpec::linear_dual(0.3, 0.2))
        );
        assert_eq!(
            closed_form_dual(&RuleSpec::dual(RuleSpec::Full)),
            Some(RuleSpec::Full)
        );
        assert_eq!(
            closed_form_dual(&RuleSpec::BFamily(ScalarFn::Constant(0.0))),
            Some(RuleSpec::BFamily(ScalarFn::Constant(1.0)))
        );
        assert!(closed_form_dual(&RuleSpec::custom("c", |p: &Problem| p.incomes().to_vec())).is_none());
    }

    #[test]
    fn afam_dual_is_ab_closed_form() {
        let r = RuleSpec::AFamily(ScalarFn::Identity);
        let closed = closed_form_dual(&r).unwrap();
        let p = Problem::from_profiles(vec![4.0, -1.0, 2.5], vec![0.5, 2.0, 1.0]).unwrap();
        let lazy = dual_evaluate(&r, &p).unwrap();
        let direct = evaluate(&closed, &p).unwrap();
        assert!(max_abs_diff(lazy.values(), direct.values()) < 1e-12);
    }

    #[test]
    fn full_is_not_self_dual() {
        let cfg = SampleConfig {
            trials: 50,
            ..SampleConfig::default()
        };
        let report = check_self_dual(&RuleSpec::Full, &cfg, 1e-9).unwrap();
        assert!(!report.is_self_dual);
        assert!(report.witness.is_some());
        let report = check_self_dual(&RuleSpec::Proportional, &cfg, 1e-9).unwrap();
        assert!(report.is_self_dual);
        assert!(report.max_deviation <= 1e-9 * 100.0);
    }
}
