use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A pivot or triangular diagonal entry is zero once rounded to `format`.
    #[error("matrix is singular in {format} (zero pivot at index {index})")]
    SingularInFormat { format: String, index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown precision format `{0}`")]
    UnknownFormat(String),

    #[error("stability assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate:e})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported MatrixMarket field `{0}`")]
    UnsupportedField(String),

    #[error("no registered format satisfies: {0}")]
    NoFormatSatisfies(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
