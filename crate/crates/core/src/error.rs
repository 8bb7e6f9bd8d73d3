use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("point is off the unit sphere (|norm - 1| = {0:e})")]
    OffSphere(f64),
    #[error("invalid rotation plane ({i}, {j}) in dimension {n}")]
    InvalidPlane { i: usize, j: usize, n: usize },
    #[error("map is not invertible: {0}")]
    NotInvertible(String),
    #[error("latitude parameter |beta| = {0} exceeds 0.9")]
    Monotonicity(f64),
    #[error("angle profile does not vanish at r = 1 (theta(1) = {0})")]
    SupportViolation(f64),
    #[error("invalid angle profile: {0}")]
    InvalidProfile(String),
    #[error("empty grid: resolution must be at least 1")]
    EmptyGrid,
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("point outside the triangulated box")]
    OutOfDomain,
    #[error("degenerate simplex {0}")]
    DegenerateSimplex(usize),
    #[error("PL map is not a homeomorphism: simplex {simplex} has determinant {det:e}")]
    NotHomeomorphism { simplex: usize, det: f64 },
    #[error("displacement too large: simplex {simplex} flips orientation")]
    DisplacementTooLarge { simplex: usize },
    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),
    #[error("insufficient samples: every sampled pair was degenerate")]
    InsufficientSamples,
    #[error("empty region")]
    EmptyRegion,
    #[error("trivial witness: the base point is fixed by the map")]
    TrivialWitness,
    #[error("no drift witness: profile limit is indistinguishable from the identity")]
    NoWitness,
    #[error("point cloud graph is disconnected at eps = {0}")]
    DisconnectedCloud(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}
