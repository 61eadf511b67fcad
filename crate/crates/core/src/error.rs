use thiserror::Error;

/// Errors raised by the spectral toolkit.
///
/// Every variant maps to a short machine-readable category via [`Error::category`],
/// which the command-line front end uses as its `error:<category>:` prefix.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),

    #[error("spectrum covers eigenvalues up to {available} but {needed} is required")]
    Coverage { needed: f64, available: f64 },

    #[error("expansions belong to different cones")]
    MismatchedCone,

    #[error("gram matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("{0}")]
    Dimension(String),

    #[error("{0}")]
    Resource(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("series has {len} points, at least {required} required")]
    InsufficientData { len: usize, required: usize },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Coverage { .. } => "coverage",
            Error::MismatchedCone => "mismatched-cone",
            Error::SingularGram { .. } => "singular-gram",
            Error::Dimension(_) => "dimension",
            Error::Resource(_) => "resource",
            Error::NonConvergence { .. } => "non-convergence",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::Format(_) => "format",
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => "io",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
