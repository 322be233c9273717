use thiserror::Error;

/// Why a [`Location`](crate::Location) cannot be measured in a given space.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocationError {
    #[error("dimension mismatch: space has {expected} coordinates, location has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("nodes {parent} -> {child} are not joined by a tree edge")]
    NotAnEdge { parent: usize, child: usize },
    #[error("edge offset {offset} outside [0, {length}]")]
    OffsetOutOfRange { offset: f64, length: f64 },
    #[error("{kind} location is not valid in a {space} space")]
    WrongSpace { kind: &'static str, space: &'static str },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed location: {0}")]
    MalformedLocation(#[from] LocationError),
    #[error("invalid metric space: {0}")]
    InvalidSpace(String),
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance has {n} demands, exact enumeration is limited to {max}")]
    TooLargeForExact { n: usize, max: usize },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{0} requires a prediction sequence")]
    MissingPredictions(&'static str),
    #[error("offline cost is zero; ratio undefined")]
    ZeroOfflineCost,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
