use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. `key` names the field.
    #[error("{key}: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The precoder has zero power along every direction (e.g. `H = 0`).
    #[error("no radiating directions: trace(F^H F) = 0")]
    NoRadiatingDirections,

    #[error("selection distribution undefined: all row weights are zero")]
    DegenerateSelection,

    #[error("zero matrix has no normalized minimum gain")]
    ZeroMatrix,

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("spec: {path}: {reason}")]
    Spec { path: String, reason: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
