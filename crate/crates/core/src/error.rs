use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,
    #[error("bad vertex id {id} (graph has {n} vertices)")]
    BadVertexId { id: usize, n: usize },
    #[error("negative edge weight {weight} on ({u}, {v})")]
    NegativeWeight { u: usize, v: usize, weight: f64 },
    #[error("self-loop on vertex {0} (self-loops are disabled)")]
    SelfLoop(usize),
    #[error("u out of range: {0} (expected 0 < u <= 1)")]
    UOutOfRange(f64),
    #[error("bad shrinkage parameter: {0}")]
    BadShrinkage(String),
    #[error("unknown preset: {0}")]
    UnknownPreset(String),
    #[error("degenerate Good-Turing estimate: {0}")]
    DegenerateGoodTuring(String),
    #[error("dangling vertex {0} with zero smoothing")]
    DanglingVertex(usize),
    #[error("inconsistent distributions: {0}")]
    InconsistentDistributions(String),
    #[error("degenerate block amplitude: vertices {0:?} have zero mass")]
    DegenerateAmplitude(Vec<usize>),
    #[error("LP rank exceeded: requested {requested}, achievable maximum {max}")]
    LpRankExceeded { requested: usize, max: usize },
    #[error("degenerate Gram matrix: {0}")]
    DegenerateGram(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("requested {requested} components but only {available} are available")]
    TooManyComponents { requested: usize, available: usize },
    #[error("zero-degree vertices {0:?}")]
    ZeroDegree(Vec<usize>),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate association graph: {0}")]
    DegenerateAssociation(String),
    #[error("invalid event matrix: {0}")]
    InvalidEventMatrix(String),
}

pub type Result<T> = std::result::Result<T, Error>;
