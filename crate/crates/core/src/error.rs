use thiserror::Error;

/// Errors produced by the library.
///
/// Variants fall into two classes that the CLI maps to distinct exit codes:
/// invalid input (bad arguments, malformed configuration or data files) and
/// numerical failure (a solver or integrator that could not meet its
/// tolerance).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("{coordinate} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange { coordinate: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("profile table is not embeddable: {0}")]
    NotEmbeddable(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("resolution guard: {0}")]
    Resolution(String),

    #[error("integrator failed: {0}")]
    Integrator(String),

    #[error("eigenpair is not normalized (norm² = {0})")]
    Unnormalized(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("fit undefined: {0}")]
    Fit(String),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }

    /// True for errors caused by the caller's input (arguments, files, configuration) rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument { .. }
                | Error::OutOfRange { .. }
                | Error::NotEmbeddable(_)
                | Error::Empty(_)
                | Error::Config { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
