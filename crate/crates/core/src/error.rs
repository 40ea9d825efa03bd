use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hurwitz (max real part of spectrum {max_real:e})")]
    NotHurwitz { max_real: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zonotope generators do not span R^{0}")]
    DegenerateZonotope(usize),

    #[error("unsupported dimension {0} (at most 4)")]
    UnsupportedDimension(usize),

    #[error("polytope is unbounded")]
    UnboundedSet,

    #[error("set is empty or lower dimensional: {0}")]
    DegenerateSet(String),

    #[error("origin is not an interior point of the set")]
    OriginNotInterior,

    #[error("invalid Lyapunov pair: {0}")]
    InvalidPair(String),

    #[error("empty list of Lyapunov pairs")]
    EmptyPairList,

    #[error("hypothesis unavailable: {0}")]
    HypothesisUnavailable(String),

    #[error("origin not reachable within horizon {horizon}")]
    NotReachableWithinHorizon { horizon: f64 },

    #[error("system is not stabilizable: {0}")]
    NotStabilizable(String),

    #[error("system is not resiliently stabilizable: {0}")]
    NotResilientlyStabilizable(String),

    #[error("reconstructed control leaves the admissible box at t = {time} (excess {excess:e})")]
    ControlOutOfRange { time: f64, excess: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("dimension error at {pointer}: {message}")]
    Dimension { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Schema { .. } | Error::Dimension { .. } => 2,
            Error::NotHurwitz { .. }
            | Error::NotStabilizable(_)
            | Error::NotResilientlyStabilizable(_) => 3,
            Error::NonConvergence(_) | Error::NotReachableWithinHorizon { .. } => 4,
            _ => 1,
        }
    }
}
