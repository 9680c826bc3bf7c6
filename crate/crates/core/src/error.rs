use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The instance file did not match the schema.
    #[error("parse error in {field}{}: {message}", .arrival.map(|t| format!(" (arrival {t})")).unwrap_or_default())]
    Parse {
        field: String,
        arrival: Option<usize>,
        message: String,
    },

    /// The input parsed but violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An internal bookkeeping invariant broke. Always a bug or a malformed model.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("instance is outside the exact solver's limits ({reason}; ~{estimate} states)")]
    StateSpace { estimate: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, arrival: Option<usize>, message: impl ToString) -> Self {
        Error::Parse {
            field: field.into(),
            arrival,
            message: message.to_string(),
        }
    }
}
