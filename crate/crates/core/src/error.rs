use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfsError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("oracle regime violated: {0}")]
    RegimeViolated(String),
    #[error("engine `{engine}` does not support {feature}")]
    UnsupportedByEngine { engine: &'static str, feature: String },
    #[error("singular confusion matrix (eps01 + eps10 >= 1 for ion {ion})")]
    SingularConfusion { ion: usize },
    #[error("rank-deficient Jacobian in fit ({0})")]
    RankDeficient(String),
    #[error("fit did not converge after {iterations} iterations (chi2_reduced {chi2_reduced:.4e})")]
    NonConvergence { iterations: usize, chi2_reduced: f64 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, DfsError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> DfsError {
    DfsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
