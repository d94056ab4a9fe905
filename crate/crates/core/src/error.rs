use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("malformed patch: {0}")]
    MalformedPatch(String),
    #[error("vertex coloring is not bipartite at edge {0}-{1}")]
    NotBipartite(usize, usize),
    #[error("patch is not simply connected: {0}")]
    NotSimplyConnected(String),
    #[error("lattice vectors are not translation symmetries: {0}")]
    LatticeMismatch(String),
    #[error("invalid height field: {0}")]
    InvalidHeight(String),
    #[error("invalid tiling: {0}")]
    InvalidTiling(String),
    #[error("stale move: {0}")]
    StaleMove(String),
    #[error("no perfect matching exists")]
    NoMatching,
    #[error("vertex {0} unreachable from {1}")]
    Unreachable(usize, usize),
    #[error("pole at angle {angle} lies within the branch margin of theta0 = {theta0}")]
    BranchAmbiguity { angle: f64, theta0: f64 },
    #[error("orientation error: {0}")]
    Orientation(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("matrix dimension {dim} exceeds limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("ambient patch too small: {0}")]
    AmbientTooSmall(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
