//! Error type shared by the whole crate.

/// Everything that can go wrong when building instances, parsing files or
/// running rules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A job set, schedule or profile violates a structural requirement.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A rule or generator was configured with out-of-range parameters.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// The input is larger than a solver or accumulator is sized for.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The cost/aggregation combination is not defined or not supported.
    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
