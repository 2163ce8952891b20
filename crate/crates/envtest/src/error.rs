use thiserror::Error;

/// Errors produced by the envtest library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite values, empty sets, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller-supplied argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The data is degenerate for the requested computation
    /// (zero variance, empty table marginal, atom covering the whole marginal).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The requested statistic cannot be evaluated on this kind of sample.
    #[error("incompatible statistic: {0}")]
    IncompatibleStatistic(String),

    /// A test or experiment configuration is infeasible.
    #[error("configuration error: {0}")]
    Config(String),

    /// CSV ingestion failure, with the 1-based line number when known.
    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("report serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
