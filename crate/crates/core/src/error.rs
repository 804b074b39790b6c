use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh resolution too coarse: {0}")]
    Resolution(String),

    #[error("cell {cell} is not Euclidean-realizable (squared volume {sq_volume:e})")]
    Unrealizable { cell: usize, sq_volume: f64 },

    #[error("cell {cell} has shape quality {quality:.4} below the floor {floor}")]
    PoorQuality {
        cell: usize,
        quality: f64,
        floor: f64,
    },

    #[error("mesh audit failed: {0:?}")]
    Audit(Vec<String>),

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("function is constant")]
    ConstantFunction,

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NoConvergence {
        iterations: usize,
        worst_residual: f64,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("problem size {size} exceeds the dense cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("{context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Scenario {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
