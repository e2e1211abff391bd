use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed netpbm input. `offset` is the byte position of the problem.
    #[error("image parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("instance too large for exhaustive search: {clusters}^{points} assignments exceeds the limit of {limit}")]
    TooLarge {
        points: usize,
        clusters: usize,
        limit: u64,
    },

    #[error("generation {generation} took {elapsed_ms} ms, over the {budget_ms} ms budget")]
    TimeBudget {
        generation: usize,
        elapsed_ms: u128,
        budget_ms: u128,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}
