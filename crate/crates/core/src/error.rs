use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| entry = {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("near-degenerate eigenvalues chain over {spread:.3e}, more than 10x the clustering threshold {threshold:.3e}")]
    AmbiguousClustering { spread: f64, threshold: f64 },

    #[error("{levels} distinct levels exceeds the gap-check limit of {limit}")]
    TooManyLevels { levels: usize, limit: usize },

    #[error("no gap-valid spectrum after {0} perturbation rounds")]
    ExhaustedRetries(usize),

    #[error("Hamiltonian has degenerate energy gaps: {0}")]
    DegenerateGaps(String),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("measurement set is empty")]
    EmptySet,

    #[error("invalid dimension {0}")]
    BadDimension(usize),

    #[error("basis vector {index} is not contained in the subspace (residual {residual:.3e})")]
    BasisNotInSubspace { index: usize, residual: f64 },

    #[error("basis vector {index} is not an energy eigenstate (residual {residual:.3e})")]
    NotEigenstates { index: usize, residual: f64 },

    #[error("band edge {edge} coincides with energy level {energy}")]
    EdgeOnLevel { edge: f64, energy: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("initial state has weight {weight:.3e} outside the chosen subspace")]
    StateOutsideSubspace { weight: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
