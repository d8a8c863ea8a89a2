use thiserror::Error;

use crate::graph::EdgeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("lp backend failure: {0}")]
    Lp(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("corrupt label: {0}")]
    CorruptLabel(String),
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },
    #[error("stale compiled oracle: {0}")]
    Stale(String),
}

pub type Result<T> = std::result::Result<T, Error>;
