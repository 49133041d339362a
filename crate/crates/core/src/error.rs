use thiserror::Error;

use crate::graph::Edge;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("clique order {r} out of range for a graph on {n} vertices")]
    CliqueOrder { r: usize, n: usize },

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid matching partition: {0}")]
    InvalidPartition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matching size {m} outside [1, {r}]")]
    MatchingSize { m: usize, r: usize },

    #[error("host has {actual} vertices, at least {required} required")]
    HostTooSmall { required: usize, actual: usize },

    #[error("edge target {value} on edge {edge} outside [{low}, 1]")]
    TargetOutOfRange {
        edge: Edge,
        value: Rational,
        low: Rational,
    },

    #[error("edge {edge} has weight {sum} outside the slab [{low}, 1] (short by {residual})")]
    SlabViolated {
        edge: Edge,
        sum: Rational,
        low: Rational,
        residual: Rational,
    },

    #[error("parameter below bound: {0}")]
    BelowBound(String),

    #[error("marginal {marginal} on edge {edge} is below the target {target}")]
    MarginalBelowTarget {
        edge: Edge,
        marginal: Rational,
        target: Rational,
    },

    #[error("{what}: {requested} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        budget: u128,
    },

    #[error("member decomposition failed: {0}")]
    MemberDecomposition(Box<Error>),

    #[error("minimum degree {min_degree} below the required {required} (margin {margin})")]
    GateFailed {
        min_degree: usize,
        required: Rational,
        margin: Rational,
    },

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("verification failed on {violations} edge(s)")]
    VerificationFailed { violations: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
