use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample needs at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("sample needs at least 1 coordinate")]
    NoCoordinates,

    #[error("non-finite entry at coordinate {coord}, observation {obs}")]
    NonFinite { coord: usize, obs: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed sample CSV at line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),

    #[error("exact enumeration needs {cardinality} support atoms, above the cap of {cap}")]
    SupportTooLarge { cardinality: String, cap: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures that come from floating point evaluation rather than
    /// from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
