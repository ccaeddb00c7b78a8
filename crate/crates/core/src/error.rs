use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The random-walk operator is undefined on a node without neighbours.
    #[error("degenerate graph: node {node} has degree 0")]
    DegenerateGraph { node: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: node index {node} out of range (graph has {n_nodes} nodes)")]
    NodeOutOfRange {
        path: PathBuf,
        line: usize,
        node: usize,
        n_nodes: usize,
    },

    #[error("{path}: no row for node {node}")]
    MissingNode { path: PathBuf, node: usize },

    #[error("class {class} has no members")]
    EmptyClass { class: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Raised instead of allocating an N x N computation above the configured cap.
    #[error("graph has {n_nodes} nodes, above the exact-computation cap of {cap}; use Monte Carlo estimates instead")]
    TooLarge { n_nodes: usize, cap: usize },

    #[error("inconsistent bounds at depth {depth}: lower {lower} > upper {upper}")]
    BoundInconsistency { depth: usize, lower: f64, upper: f64 },

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
