use thiserror::Error;

/// Errors raised by the information measures and their supporting routines.
///
/// Zero-probability conflicts are *not* errors: they surface as signed
/// infinities inside an [`InfoQuantity`](crate::units::InfoQuantity).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AigError {
    #[error("family mismatch: {left} vs {right}")]
    FamilyMismatch { left: String, right: String },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("outcome {outcome} lies outside the support of {family}")]
    OutsideSupport { outcome: String, family: String },

    #[error("covariance `{which}` is not positive definite")]
    NotPositiveDefinite { which: String },

    #[error("indeterminate gain: {0}")]
    Indeterminate(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, AigError>;

impl AigError {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        AigError::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
