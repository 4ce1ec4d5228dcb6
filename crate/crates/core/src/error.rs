use std::io;

use thiserror::Error;

/// Errors raised across the embedding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown node identifier `{0}`")]
    UnknownNode(String),

    #[error("node `{0}` is labeled more than once")]
    DuplicateLabel(String),

    #[error("inconsistent feature dimensionality: {0}")]
    FeatureDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("every node is isolated; no walk can start")]
    AllIsolated,

    #[error("label context requested but no class has at least two labeled members")]
    NoLabelPairs,

    #[error("dense computation over {nodes} nodes exceeds the size guard of {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("binomial support violated at ({row}, {col}): count {count} exceeds bound {bound}")]
    Support { row: usize, col: usize, count: f64, bound: f64 },

    #[error(
        "training diverged at outer iteration {outer} ({block} block): loss {before} -> {after}; lower the step size"
    )]
    Diverged { outer: usize, block: &'static str, before: f64, after: f64 },

    #[error("insufficient data for split: {0}")]
    Split(String),

    #[error("metric undefined: {0}")]
    Metric(&'static str),

    #[error("unknown heuristic `{0}` (expected cn, jaccard, aa or pa)")]
    UnknownMethod(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
