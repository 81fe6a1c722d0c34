use redistrib_core::Problem;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Top-level JSON document written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: &'static str,
    /// Arguments after the program name, as given.
    pub invocation: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub rules: Vec<String>,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRow {
    pub id: String,
    pub income: f64,
    pub need: f64,
    pub allocation: f64,
    /// `allocation / need`, null when the need is zero.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let total: f64 = values.iter().sum();
        Summary {
            total,
            mean: total / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub fn coverage(allocation: f64, need: f64) -> Option<f64> {
    (need > 0.0).then(|| allocation / need)
}

pub fn agent_rows(p: &Problem, x: &[f64]) -> Vec<AgentRow> {
    p.agents()
        .iter()
        .zip(p.incomes())
        .zip(p.needs())
        .zip(x)
        .map(|(((id, &income), &need), &allocation)| AgentRow {
            id: id.as_str().to_owned(),
            income,
            need,
            allocation,
            coverage: coverage(allocation, need),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_coverage() {
        let s = Summary::of(&[1.5, 4.5]);
        assert_eq!((s.total, s.mean, s.min, s.max), (6.0, 3.0, 1.5, 4.5));
        assert_eq!(coverage(3.0, 0.0), None);
        assert_eq!(coverage(3.0, 2.0), Some(1.5));
    }
}
