use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("duplicate edge between {u} and {v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("non-finite date on edge ({u}, {v})")]
    NonFiniteDate { u: usize, v: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("density {0} is outside (0, 1); the logistic intercept is undefined")]
    DegenerateDensity(f64),
    #[error("graph has no edges")]
    NoEdges,
    #[error("line search found no ascent step from the initial point")]
    LineSearchFailed,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
