use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("differential does not square to zero: {0}")]
    NotSquareZero(String),
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<GraphViolation>),
    #[error("not an edge: {0}")]
    NotAnEdge(String),
    #[error("not a thick edge of the graph: {0}")]
    NotAThickEdge(String),
    #[error("thick edge is not admissible: {0}")]
    Inadmissible(String),
    #[error("graft failed: {0}")]
    Graft(String),
    #[error("tree error: {0}")]
    Tree(String),
    #[error("bimodule invalid: {0}")]
    Bimodule(String),
    #[error("arity mismatch at vertex {vertex}: {detail}")]
    ArityMismatch { vertex: String, detail: String },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("composition rule missing: {0}")]
    MissingRule(String),
    #[error("transfer context invalid: {0}")]
    Context(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("instance spec invalid: {0}")]
    Instance(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One violated invariant found while validating a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    InvolutionNotInvolutive(String),
    PartitionOverlap(String),
    PartitionIncomplete(String),
    DirectionInconsistentOnEdge(String, String),
    Disconnected,
    DirectedCycle(Vec<String>),
    BadLabeling(String),
}

impl std::fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphViolation::InvolutionNotInvolutive(x) => write!(f, "involution-not-involutive at {x}"),
            GraphViolation::PartitionOverlap(x) => write!(f, "partition-overlap at {x}"),
            GraphViolation::PartitionIncomplete(x) => write!(f, "partition-incomplete: {x}"),
            GraphViolation::DirectionInconsistentOnEdge(a, b) => {
                write!(f, "direction-inconsistent-on-edge ({a} {b})")
            }
            GraphViolation::Disconnected => write!(f, "disconnected"),
            GraphViolation::DirectedCycle(vs) => write!(f, "directed-cycle through {}", vs.join(",")),
            GraphViolation::BadLabeling(x) => write!(f, "bad-labeling: {x}"),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column()))
    }
}
