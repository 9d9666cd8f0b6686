use thiserror::Error;

use crate::lattice::{Edge, LatticeBox, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid annulus: {0}")]
    InvalidAnnulus(String),
    #[error("annulus sequence too short: k = {k} (need at least 3)")]
    TooFewAnnuli { k: u32 },
    #[error("invalid annulus parameters: {0}")]
    InvalidScale(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("edge {edge} lies outside box {bbox}")]
    EdgeOutsideBox { edge: Edge, bbox: LatticeBox },
    #[error("vertex {vertex} lies outside box {bbox}")]
    VertexOutsideBox { vertex: Vertex, bbox: LatticeBox },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("weight {0} is not in the distribution's support")]
    WeightNotInSupport(String),
    #[error("empty source set")]
    EmptySource,
    #[error("target unreachable from source")]
    Unreachable,
    #[error("box has {edges} edges; brute force is limited to {limit}")]
    BoxTooLarge { edges: usize, limit: usize },
    #[error("crossing is not open")]
    CrossingNotOpen,
    #[error("event index {i} out of range for k = {k}")]
    EventIndex { i: u32, k: u32 },
    #[error("unsupported square side {0} (only unit squares have companions)")]
    UnsupportedSquareSide(u32),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("nonpositive input to a logarithmic fit: ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
