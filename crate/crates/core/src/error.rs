use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not positive")]
    NonPositive(i64),
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("radicand {0} does not define a quadratic field")]
    DegenerateRadicand(i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("class number for D = {discriminant} not certified: residual {residual:.3e} at {bits} bits")]
    PrecisionFailure {
        discriminant: i64,
        residual: f64,
        bits: usize,
    },
    #[error("|D| = {discriminant} exceeds the oracle bound {bound}")]
    OracleBoundExceeded { discriminant: i64, bound: u64 },
    #[error("radicand {0} is even")]
    EvenRadicand(i64),
    #[error("Q(sqrt {0}, sqrt {1}) is not a biquadratic field")]
    DegenerateField(i64, i64),
    #[error("radicand {0} is negative; only real fields are supported")]
    NotTotallyReal(i64),
    #[error("element is not totally positive")]
    NotTotallyPositive,
    #[error("field does not have the shape Q(sqrt q, sqrt rs)")]
    ShapeMismatch,
    #[error("{0} exceeds the supported 64-bit range")]
    Overflow(String),
    #[error("class-number cache conflict for D = {discriminant}: {first} vs {second}")]
    CacheConflict {
        discriminant: i64,
        first: u64,
        second: u64,
    },
    #[error("malformed cache line {line}: {content:?}")]
    CacheFormat { line: usize, content: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl Error {
    /// Errors that indicate a bug (a violated identity) rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InternalInconsistency(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
