use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building problems, evaluating rules,
/// or running the sampled checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("problem has no agents")]
    EmptyAgentSet,

    #[error("agent {agent} has negative need {value}")]
    NegativeNeed { agent: usize, value: f64 },

    #[error("total need {total} is not positive")]
    ZeroTotalNeed { total: f64 },

    #[error("non-finite {field} at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("allocation sums to {sum}, expected {expected} (residual {residual:e})")]
    Imbalance {
        sum: f64,
        expected: f64,
        residual: f64,
    },

    #[error("convex weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),

    #[error("invalid sample configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("extraction needs at least two agents, got {0}")]
    NotApplicable(usize),

    #[error("`{0}` has no representation in the rule grammar")]
    NonRepresentable(String),

    #[error("parse error at offset {position}: unexpected `{token}`, expected {expected}")]
    Parse {
        position: usize,
        token: String,
        expected: String,
    },
}
