use thiserror::Error;

/// Errors raised by the numerical routines and the command line layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series did not converge: {0}")]
    Divergence(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("mesh problem: {0}")]
    Mesh(String),
    #[error("singular evaluation: {0}")]
    Singularity(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("resolvent solve failed: {0}")]
    Resolvent(String),
    #[error("contour quadrature failed: {0}")]
    Contour(String),
    #[error("series truncated with non-negligible tail: {0}")]
    Truncation(String),
    #[error("sample not monotone: {0}")]
    Monotonicity(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("class violation: {0}")]
    ClassViolation(String),
    #[error("no convergence after {iterations} iterations (last ratio {ratio:e})")]
    NonConvergence { iterations: usize, ratio: f64 },
    #[error("trajectory leaves the ball: {0}")]
    BallViolation(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in `ERROR:<kind>:` lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Divergence(_) => "DivergenceError",
            Error::Domain(_) => "DomainError",
            Error::Mesh(_) => "MeshError",
            Error::Singularity(_) => "SingularityError",
            Error::Dimension { .. } => "DimensionError",
            Error::Resolvent(_) => "ResolventError",
            Error::Contour(_) => "ContourError",
            Error::Truncation(_) => "TruncationError",
            Error::Monotonicity(_) => "MonotonicityError",
            Error::Hypothesis(_) => "HypothesisError",
            Error::ClassViolation(_) => "ClassViolation",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::BallViolation(_) => "BallViolation",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
