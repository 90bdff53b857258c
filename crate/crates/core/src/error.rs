use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric (max relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("metric is not positive semi-definite (<Mu, u> = {inner:e})")]
    NotPsd { inner: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("eigenvector residual {residual:e} exceeds bound {bound:e}")]
    EigenvectorResidual { residual: f64, bound: f64 },

    #[error("singular matrix encountered in {context}")]
    Singular { context: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unbounded optimal stepsize: {0}")]
    UnboundedStepsize(&'static str),

    #[error("non-finite iterate at iteration {k} (t = {t:e}, s = {s:e})")]
    NonFinite { k: usize, t: f64, s: f64 },

    #[error("resolvent returned a non-finite value at iteration {k}")]
    ResolventNonFinite { k: usize },

    #[error("algebraic consistency check failed in {context} (relative gap {gap:e})")]
    Inconsistent { context: &'static str, gap: f64 },

    #[error("zero vector passed where a nonzero vector is required")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
