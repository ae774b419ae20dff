use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("flux p·d = {0} is not an integer")]
    QuantizationViolated(f64),
    #[error("grid {n} is too coarse; need at least {min} points per side")]
    GridTooCoarse { n: usize, min: usize },
    #[error("{what} did not converge; residuals {residuals:?}")]
    NonConvergence { what: String, residuals: Vec<f64> },
    #[error("cluster boundary is ambiguous at p = {p}: eigenvalue {value} lies near {boundary}")]
    AmbiguousCluster { p: u32, value: f64, boundary: f64 },
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("theta truncation bound {0:e} not met")]
    TruncationBound(f64),
    #[error("base locus is nonempty: B_0 = {value} at a grid point")]
    BaseLocus { value: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Core(#[from] bergman_core::Error),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SpecError>;

impl From<std::io::Error> for SpecError {
    fn from(e: std::io::Error) -> Self {
        SpecError::Io(e.to_string())
    }
}
