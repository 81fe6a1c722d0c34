//! Redistribution problems with needs and the allocations rules produce for them.
//!
//! A [`Problem`] is an ordered agent set carrying an income profile (any finite
//! reals, negatives included) and a need profile (non-negative, positive total).
//! Aggregates are summed once, in input order, at construction.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative slack on the balance condition `sum(x) = Y`.
pub const BALANCE_EPS: f64 = 1e-9;

/// Opaque agent identifier. Agents are equal iff their identifiers are.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

impl From<usize> for AgentId {
    fn from(i: usize) -> Self {
        AgentId(i.to_string())
    }
}

/// Aggregate income `Y`, aggregate need `Z` and agent count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregates {
    pub total_income: f64,
    pub total_need: f64,
    pub agents: usize,
}

/// A validated redistribution problem. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    agents: Arc<[AgentId]>,
    incomes: Vec<f64>,
    needs: Vec<f64>,
    total_income: f64,
    total_need: f64,
}

fn ensure_finite(field: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { field, index }),
        None => Ok(()),
    }
}

/// `1e-9 * max(1, |Y|)`.
pub fn balance_tolerance(total_income: f64) -> f64 {
    BALANCE_EPS * total_income.abs().max(1.0)
}

impl Problem {
    /// Validates and builds a problem. Input order is preserved.
    pub fn new<I, A>(ids: I, incomes: Vec<f64>, needs: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = A>,
        A: Into<AgentId>,
    {
        let agents: Arc<[AgentId]> = ids.into_iter().map(Into::into).collect();
        Self::build(agents, incomes, needs)
    }

    /// Builds a problem whose agents are labelled `1..=n`.
    pub fn from_profiles(incomes: Vec<f64>, needs: Vec<f64>) -> Result<Self> {
        let agents: Arc<[AgentId]> = (1..=incomes.len()).map(AgentId::from).collect();
        Self::build(agents, incomes, needs)
    }

    fn build(agents: Arc<[AgentId]>, incomes: Vec<f64>, needs: Vec<f64>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::EmptyAgentSet);
        }
        for found in [incomes.len(), needs.len()] {
            if found != agents.len() {
                return Err(Error::LengthMismatch {
                    expected: agents.len(),
                    found,
                });
            }
        }
        ensure_finite("income", &incomes)?;
        ensure_finite("need", &needs)?;
        if let Some((agent, &value)) = needs.iter().enumerate().find(|(_, z)| **z < 0.0) {
            return Err(Error::NegativeNeed { agent, value });
        }
        let total_income: f64 = incomes.iter().sum();
        let total_need: f64 = needs.iter().sum();
        if !total_income.is_finite() {
            return Err(Error::NonFinite {
                field: "total income",
                index: 0,
            });
        }
        if !total_need.is_finite() {
            return Err(Error::NonFinite {
                field: "total need",
                index: 0,
            });
        }
        if total_need <= balance_tolerance(total_income) {
            return Err(Error::ZeroTotalNeed { total: total_need });
        }
        Ok(Problem {
            agents,
            incomes,
            needs,
            total_income,
            total_need,
        })
    }

    /// Same agents and needs, new incomes.
    pub fn with_incomes(&self, incomes: Vec<f64>) -> Result<Self> {
        Self::build(self.agents.clone(), incomes, self.needs.clone())
    }

    /// Same agents, new profiles.
    pub fn with_profiles(&self, incomes: Vec<f64>, needs: Vec<f64>) -> Result<Self> {
        Self::build(self.agents.clone(), incomes, needs)
    }

    /// `(rho * y, rho * z)`.
    pub fn scaled(&self, rho: f64) -> Result<Self> {
        self.with_profiles(
            self.incomes.iter().map(|y| rho * y).collect(),
            self.needs.iter().map(|z| rho * z).collect(),
        )
    }

    /// Drops agent `index`, keeping everyone else in order.
    pub fn without_agent(&self, index: usize) -> Result<Self> {
        let keep = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .filter(|(i, _)| *i != index)
                .map(|(_, x)| *x)
                .collect()
        };
        let agents: Arc<[AgentId]> = self
            .agents
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != index)
            .map(|(_, a)| a.clone())
            .collect();
        Self::build(agents, keep(&self.incomes), keep(&self.needs))
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn needs(&self) -> &[f64] {
        &self.needs
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn total_income(&self) -> f64 {
        self.total_income
    }

    pub fn total_need(&self) -> f64 {
        self.total_need
    }

    /// The social cost of needs, `t = Y / Z`.
    pub fn ratio(&self) -> f64 {
        self.total_income / self.total_need
    }

    pub fn aggregates(&self) -> Aggregates {
        Aggregates {
            total_income: self.total_income,
            total_need: self.total_need,
            agents: self.len(),
        }
    }

    pub fn balance_tolerance(&self) -> f64 {
        balance_tolerance(self.total_income)
    }

    /// `max(1, |Y|, Z)`, the scale that sampled tolerances are multiplied by.
    pub fn magnitude(&self) -> f64 {
        self.total_income.abs().max(self.total_need).max(1.0)
    }
}

impl Serialize for Problem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Problem", 3)?;
        s.serialize_field("agents", &self.agents[..])?;
        s.serialize_field("incomes", &self.incomes)?;
        s.serialize_field("needs", &self.needs)?;
        s.end()
    }
}

/// Free-function form of [`Problem::new`].
pub fn make_problem<I, A>(ids: I, incomes: Vec<f64>, needs: Vec<f64>) -> Result<Problem>
where
    I: IntoIterator<Item = A>,
    A: Into<AgentId>,
{
    Problem::new(ids, incomes, needs)
}

pub fn aggregates(p: &Problem) -> Aggregates {
    p.aggregates()
}

/// Outcome of [`check_allocation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceVerdict {
    pub passed: bool,
    /// `sum(x) - Y`.
    pub residual: f64,
    pub tolerance: f64,
}

/// Checks `|sum(x) - Y| <= 1e-9 * max(1, |Y|)`.
pub fn check_allocation(p: &Problem, x: &[f64]) -> Result<BalanceVerdict> {
    if x.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: x.len(),
        });
    }
    ensure_finite("allocation", x)?;
    let residual = x.iter().sum::<f64>() - p.total_income();
    let tolerance = p.balance_tolerance();
    Ok(BalanceVerdict {
        passed: residual.abs() <= tolerance,
        residual,
        tolerance,
    })
}

/// A balanced allocation for some problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Allocation {
    values: Vec<f64>,
}

impl Allocation {
    /// Wraps `values`, rejecting anything that fails [`check_allocation`].
    pub fn new(p: &Problem, values: Vec<f64>) -> Result<Self> {
        let verdict = check_allocation(p, &values)?;
        if !verdict.passed {
            return Err(Error::Imbalance {
                sum: p.total_income() + verdict.residual,
                expected: p.total_income(),
                residual: verdict.residual,
            });
        }
        Ok(Allocation { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl Index<usize> for Allocation {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Max-norm distance between two equally long vectors.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_agent_aggregates() {
        let p = make_problem([1usize, 2], vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
        let agg = aggregates(&p);
        assert_eq!(agg.total_income, 6.0);
        assert_eq!(agg.total_need, 4.0);
        assert_eq!(agg.agents, 2);
        assert_eq!(p.agents()[1], AgentId::from("2"));
    }

    #[test]
    fn aggregate_examples() {
        let p = Problem::from_profiles(vec![-2.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            (p.total_income(), p.total_need(), p.len()),
            (0.0, 2.0, 2)
        );
        let p = Problem::from_profiles(vec![3.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(
            (p.total_income(), p.total_need(), p.len()),
            (4.0, 4.0, 2)
        );
    }

    #[test]
    fn single_agent_is_valid() {
        let p = make_problem([1usize], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.total_income(), 0.0);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let empty: [usize; 0] = [];
        assert_eq!(
            make_problem(empty, vec![], vec![]),
            Err(Error::EmptyAgentSet)
        );
        assert!(matches!(
            make_problem([1usize, 2], vec![5.0, 1.0], vec![0.0, 0.0]),
            Err(Error::ZeroTotalNeed { .. })
        ));
        assert_eq!(
            make_problem([1usize, 2], vec![5.0, 1.0], vec![-1.0, 3.0]),
            Err(Error::NegativeNeed {
                agent: 0,
                value: -1.0
            })
        );
        assert_eq!(
            make_problem([1usize, 2], vec![5.0, f64::NAN], vec![1.0, 3.0]),
            Err(Error::NonFinite {
                field: "income",
                index: 1
            })
        );
        assert_eq!(
            make_problem([1usize, 2], vec![5.0, 1.0], vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite {
                field: "need",
                index: 1
            })
        );
        assert_eq!(
            make_problem([1usize, 2], vec![5.0], vec![1.0, 3.0]),
            Err(Error::LengthMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn tiny_total_need_counts_as_zero() {
        // Z must exceed 1e-9 * max(1, |Y|).
        assert!(matches!(
            Problem::from_profiles(vec![100.0], vec![1e-8]),
            Err(Error::ZeroTotalNeed { .. })
        ));
        assert!(Problem::from_profiles(vec![1.0], vec![1e-8]).is_ok());
    }

    #[test]
    fn negative_incomes_are_allowed() {
        let p = Problem::from_profiles(vec![-5.0, -1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(p.total_income(), -6.0);
        assert_eq!(p.ratio(), -6.0);
    }

    #[test]
    fn allocation_balance_checks() {
        let p = Problem::from_profiles(vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
        let v = check_allocation(&p, &[1.5, 4.5]).unwrap();
        assert!(v.passed);
        assert_eq!(v.residual, 0.0);
        assert!(check_allocation(&p, &[5.0, 1.0]).unwrap().passed);
        let v = check_allocation(&p, &[5.0, 2.0]).unwrap();
        assert!(!v.passed);
        assert_eq!(v.residual, 1.0);
        assert!(matches!(
            check_allocation(&p, &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            check_allocation(&p, &[f64::NAN, 6.0]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            Allocation::new(&p, vec![5.0, 2.0]),
            Err(Error::Imbalance { .. })
        ));
    }

    #[test]
    fn derived_problems_share_agents() {
        let p = Problem::new(["a", "b", "c"], vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 2.0]).unwrap();
        let q = p.scaled(2.0).unwrap();
        assert_eq!(q.incomes(), &[2.0, 4.0, 6.0]);
        assert_eq!(q.agents(), p.agents());
        let r = p.without_agent(1).unwrap();
        assert_eq!(r.agents(), &[AgentId::from("a"), AgentId::from("c")]);
        assert_eq!(r.needs(), &[1.0, 2.0]);
        assert!(p.without_agent(0).unwrap().without_agent(1).is_err());
    }

    #[test]
    fn serializes_profiles() {
        let p = Problem::new(["a", "b"], vec![5.0, 1.0], vec![1.0, 3.0]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"agents":["a","b"],"incomes":[5.0,1.0],"needs":[1.0,3.0]}"#
        );
    }
}
