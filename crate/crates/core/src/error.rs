use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("field or measure belongs to a different grid")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential {potential} cannot be evaluated on this grid: {reason}")]
    ModeMismatch {
        potential: &'static str,
        reason: String,
    },

    #[error("node {0} is hard or outside the active set")]
    InactiveNode(usize),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("operator is not positive definite on the active set")]
    Indefinite,

    #[error("spectrum is unbounded below at the clip scale (Rayleigh value {rayleigh:.6e})")]
    SpectrumUnbounded {
        rayleigh: f64,
        certificate: Vec<f64>,
    },

    #[error("monotone scheme violated monotonicity at step {step} by {violation:.3e}")]
    MonotonicityViolated { step: usize, violation: f64 },

    #[error("unresolved radius: delta {delta} is below the mesh width {h}")]
    UnresolvedRadius { delta: f64, h: f64 },

    #[error("empty complement: every node lies in the zero set")]
    EmptyComplement,

    #[error("defect estimator requires codimension-one S")]
    NotInterface,

    #[error("no constant C <= 2^64 satisfies the comparison inequality")]
    CalibrationFailed,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
