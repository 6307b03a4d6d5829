//! Error taxonomy shared by every module.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature could not reach the requested tolerance.
    /// The partial value and its estimated error are carried along so a
    /// caller may still use them knowingly.
    #[error("accuracy budget exhausted after {terms_used} terms: value {value} ± {est_error}")]
    Accuracy {
        value: f64,
        est_error: f64,
        terms_used: usize,
    },

    /// A configuration bound was exceeded (for example a truncation plan
    /// demanding more terms than the caller allows).
    #[error("configuration error: {0}")]
    Config(String),

    /// An internal invariant failed. This indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
