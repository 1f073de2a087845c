use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The rotation is too close to pi for the logarithm to pick a branch.
    #[error("rotation angle {angle} rad is on the ambiguous logarithm branch")]
    AmbiguousBranch { angle: f64 },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),

    #[error("invalid edge {from} -> {to}: {reason}")]
    InvalidEdge {
        from: NodeId,
        to: NodeId,
        reason: String,
    },

    #[error("no edge between nodes {from} and {to}")]
    MissingEdge { from: NodeId, to: NodeId },

    #[error("graph is disconnected into {} components: {components:?}", components.len())]
    Disconnected { components: Vec<Vec<NodeId>> },

    #[error("graph has no fixed node")]
    NoFixedNode,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Too few motions, all axes parallel, or rotations too small.
    #[error("insufficient motion: {0}")]
    InsufficientMotion(String),

    #[error("translation is unobservable along {null_direction:?}")]
    UnderConstrained { null_direction: [f64; 3] },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("estimator failed with sample {omitted} left out: {source}")]
    LeaveOneOut { omitted: usize, source: Box<Error> },

    #[error("iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
