//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Structurally unusable input (wrong header, undecodable stream).
    /// Individual malformed lines are skipped and counted, not raised.
    #[error("malformed input: {0}")]
    Format(String),

    #[error("invalid {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("graph has no edges")]
    NoEdges,

    #[error("graph has no nodes")]
    EmptyGraph,

    /// Relative node weights are undefined for nodes without incident edges.
    #[error("node '{0}' has no incident edges")]
    IsolatedNode(String),

    #[error("unknown node '{0}'")]
    UnknownNode(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("graph is disconnected; compute per connected component and tile the results")]
    Disconnected,

    #[error("exhaustive search supports at most {max} nodes, got {nodes}")]
    ExhaustiveLimit { nodes: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
