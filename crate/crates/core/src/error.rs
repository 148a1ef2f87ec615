use thiserror::Error;

/// Errors produced by the walk toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the range where the requested object is defined.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called with arguments that violate its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The configured node or sample cap would be exceeded.
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded { what: &'static str, needed: u128, limit: u128 },

    /// Every chain-growth tour died before reaching the target length.
    #[error(
        "degenerate sampler: all {tours} tours died before length {target} \
         (deepest length reached {deepest}, {pruned} prunings, {trapped} trapped chains)"
    )]
    DegenerateSampler {
        tours: usize,
        target: usize,
        deepest: usize,
        pruned: u64,
        trapped: u64,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
