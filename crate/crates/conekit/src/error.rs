use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum ConekitError {
    #[error("unsupported link dimension {0} (need at least {1})")]
    UnsupportedDimension(usize, usize),
    #[error("dimension mismatch: cone dimension {cone_dim} incompatible with link dimension {dim_link}")]
    DimensionMismatch { cone_dim: usize, dim_link: usize },
    #[error("invalid spectrum at {path}: {message}")]
    InvalidSpectrum { path: String, message: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("target rate {rate} is exceptional: within {gap} of {nearest} ({context})")]
    ExceptionalRate {
        rate: f64,
        nearest: f64,
        gap: f64,
        context: String,
    },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("grid differentiation accuracy {got:.3e} above tolerance {tol:.3e}")]
    DifferentiationAccuracy { got: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("metric is singular at the requested point")]
    SingularMetric,
    #[error("finite-difference step-size failure: residual disagreement {0:.3e}")]
    StepSizeFailure(f64),
    #[error("boundary integrals show no limit (growing along the schedule): {0}")]
    NoLimit(String),
    #[error("tail of the integral diverges: {0}")]
    TailDivergence(String),
    #[error("form is not closed: max |d omega| coefficient {0}")]
    NotClosed(String),
    #[error("linear system is inconsistent: {0}")]
    Unsolvable(String),
    #[error("metric decay rate {fitted:.3} below the mass well-definedness threshold {required:.3}; pass warn_and_proceed to override")]
    DecayTooSlow { fitted: f64, required: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ConekitError>;
