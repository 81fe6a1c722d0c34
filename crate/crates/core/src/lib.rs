//! Redistribution rules for problems with incomes and needs.
//!
//! - [`problem`]: problems, allocations and the balance condition.
//! - [`rules`]: laissez-faire, full, proportional and need-adjusted full
//!   redistribution plus the parameterized AB, A-, B- and linear families.
//! - [`grammar`]: the text form of rule specs (`convex(lf;prop;0.5)`, ...).
//! - [`duality`]: `R^d(y, z) = z - R(z - y, z)` and closed-form duals.
//! - [`axioms`]: seeded sampled checks with shrunk counterexamples.
//! - [`analysis`]: AB-form recovery, classification and consistency checks.
//!
//! ```
//! use redistrib_core::{evaluate, Problem, RuleSpec};
//!
//! let p = Problem::new(["a", "b"], vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
//! let rule: RuleSpec = "convex(lf;prop;0.5)".parse().unwrap();
//! assert_eq!(evaluate(&rule, &p).unwrap().values(), &[3.25, 2.75]);
//! ```

pub mod analysis;
pub mod axioms;
pub mod duality;
pub mod error;
pub mod grammar;
pub mod problem;
pub mod rules;
pub mod sampling;
pub mod scalar;

pub use analysis::{
    classify, extract_ab, parse_grid, profile_rule, verify_characterization, AbPoint, AbProfile,
    CharacterizationReport, Classification, Label, Shape,
};
pub use axioms::{axiom_suite, check_axiom, parse_axioms, Axiom, AxiomReport, Counterexample, Witness};
pub use duality::{check_self_dual, closed_form_dual, dual_ab, dual_evaluate, DualReport};
pub use error::{Error, Result};
pub use grammar::{parse_rule, parse_rule_list};
pub use problem::{aggregates, check_allocation, make_problem, AgentId, Aggregates, Allocation, BalanceVerdict, Problem};
pub use rules::{equivalent_on, evaluate, evaluation_stats, CustomRule, Equivalence, EvaluationStats, RuleSpec};
pub use sampling::{sample_problems, SampleConfig};
pub use scalar::ScalarFn;
