use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Tensors or fields of different spatial dimension were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// Fields living on different grids were combined.
    GridMismatch,
    /// A parameter is outside its admissible range.
    InvalidParameter(String),
    /// A NaN or infinity appeared while assembling a term.
    NonFinite { what: &'static str },
    /// A dyadic block that must be nonzero vanished.
    EmptyBlock { j: usize },
    /// An operation that needs a nonzero field got zero.
    ZeroField,
    /// A time series was empty.
    EmptySeries,
    /// Records were not uniformly spaced in time.
    NonUniformSpacing,
    /// Two series sampled on different time grids.
    MismatchedSeries,
    /// Failure reported by an output sink.
    Sink(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::GridMismatch => f.write_str("fields live on different grids"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::EmptyBlock { j } => write!(f, "dyadic block {j} is empty"),
            Error::ZeroField => f.write_str("field is identically zero"),
            Error::EmptySeries => f.write_str("empty series"),
            Error::NonUniformSpacing => f.write_str("records are not uniformly spaced"),
            Error::MismatchedSeries => f.write_str("series sampled on different time grids"),
            Error::Sink(msg) => write!(f, "output sink failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
