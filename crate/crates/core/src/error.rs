use thiserror::Error;

/// Errors produced by the criteria library.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frame constraint violated: {0}")]
    FrameConstraint(String),

    #[error("quadrature did not converge: best estimate {estimate} with error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("distribution exceeds the domain of {function}: sup {sup} > t_max {t_max}")]
    Domain { function: String, sup: f64, t_max: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unsupported frame: {0}")]
    UnsupportedFrame(String),

    #[error("unsupported sampler: {0}")]
    UnsupportedSampler(String),

    #[error("covariance matrix is not positive definite (det = {det})")]
    NotPositiveDefinite { det: f64 },

    #[error("negative variance {0}")]
    NegativeVariance(f64),

    #[error("tile extent too small: tail mass {tail} exceeds {limit}")]
    TailMass { tail: f64, limit: f64 },

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("Rényi order {beta} is truncation dominated (supported range is [{min}, {max}])")]
    TruncationDominated { beta: f64, min: f64, max: f64 },

    #[error("function `{0}` is not concave")]
    NotConcave(String),

    #[error("mixture fit failed: {0}")]
    Fit(String),

    #[error("sample input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
