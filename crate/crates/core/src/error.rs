use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("newick syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("duplicate leaf label `{0}`")]
    DuplicateLabel(String),

    #[error("internal node {node} has degree {degree}, below the minimum of 3")]
    DegreeTooLow { node: usize, degree: usize },

    #[error("node {node} has degree {degree}, above the bound {bound}")]
    DegreeTooHigh {
        node: usize,
        degree: usize,
        bound: usize,
    },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid weight `{0}`")]
    InvalidWeight(String),

    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(usize, usize),

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("leaf label sets differ: `{0}` is missing from one tree")]
    LabelMismatch(String),

    #[error("label `{symbol}` occurs {left} times in the first tree and {right} times in the second")]
    MultisetMismatch {
        symbol: String,
        left: usize,
        right: usize,
    },

    #[error("{0} multisets of the two trees differ")]
    Precondition(&'static str),

    #[error("empty label set")]
    EmptyLabelSet,

    #[error("label sets overlap on symbol {0}")]
    OverlappingSets(u32),

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
