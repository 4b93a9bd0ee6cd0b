use thiserror::Error;

/// Errors raised across the mesh, discretisation, solver and study layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid mesh parameters: {0}")]
    InvalidMeshParameters(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh already contains triangles")]
    AlreadyTriangulated,

    #[error("unknown element family `{0}`")]
    UnknownFamily(String),

    #[error("family {family} needs {expected} elements, mesh has {found}")]
    IncompatibleFamily {
        family: String,
        expected: String,
        found: String,
    },

    #[error("unknown estimator mode `{0}`")]
    UnknownMode(String),

    #[error("point ({0}, {1}) lies outside the reference element")]
    OutsideReference(f64, f64),

    #[error("edge {edge} is not an edge of element {element}")]
    EdgeNotOnElement { edge: usize, element: usize },

    #[error("edge {0} is not an interior matrix edge")]
    NotInteriorMatrixEdge(usize),

    #[error("edge {0} does not lie on the conduit")]
    NotConduitEdge(usize),

    #[error("unsupported quadrature degree {0}")]
    UnsupportedQuadrature(usize),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("nonconforming family {0} requires the jump penalty")]
    PenaltyRequired(String),

    #[error("singular local system in {0}")]
    Singular(String),

    #[error("invalid problem data: {0}")]
    InvalidData(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero-gradient field: alignment measure undefined")]
    ZeroGradient,

    #[error("study needs at least two levels, got {0}")]
    TooFewLevels(usize),

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
