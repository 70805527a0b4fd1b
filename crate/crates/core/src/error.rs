use thiserror::Error;

use crate::topology::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Ordered pairs for which no rule-compliant route exists.
    #[error("unroutable: {} pair(s) have no rule-compliant route", .0.len())]
    Unroutable(Vec<(NodeId, NodeId)>),

    #[error("augmentation edge rejected: {0}")]
    Augmentation(String),

    #[error("malformed routing-graph path: {0}")]
    MalformedPath(String),

    #[error("integrity failure: {0}")]
    Integrity(String),

    #[error("search budget of {0} candidates exceeded")]
    SearchBudget(usize),

    #[error("{0}")]
    Invalid(String),
}
