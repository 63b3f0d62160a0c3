use thiserror::Error;

/// Errors raised by the geometry kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("numerical breakdown: non-finite value at {path}")]
    NumericalBreakdown { path: String },

    #[error("left the chart domain at x = {x:?}")]
    DomainExit { x: Vec<f64> },

    #[error("invalid tangent sample: {0}")]
    InvalidSample(String),

    #[error("homogeneity violated: {0}")]
    HomogeneityViolation(String),

    #[error("metric is not positive definite at x = {x:?}")]
    MetricDegenerate { x: Vec<f64> },

    #[error("fundamental tensor is not positive definite at x = {x:?}, y = {y:?}")]
    NotStronglyConvex { x: Vec<f64>, y: Vec<f64> },

    #[error("premise failed: {0}")]
    PremiseFailed(String),

    #[error("term `{0}` carries no alpha-parity tag")]
    ParityViolation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `NumericalBreakdown` naming the first non-finite entry of `values`.
pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::NumericalBreakdown {
            path: format!("{what}[{i}]"),
        }),
    }
}
