use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a model invariant.
    InvalidConfig(String),
    /// A 1-based sub-array or element index outside its range.
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// The 1-D SLNR restriction is constant in the analog phase being updated.
    FlatDirection,
    /// The closed-form phase update produced an `arcsin` argument outside
    /// `[-1, 1]` by more than the clamping tolerance.
    Conditioning {
        argument: f64,
    },
    /// A channel (or effective channel) that must be nonzero is zero.
    DegenerateChannel(&'static str),
    EmptyGrid,
    SingularMatrix,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::IndexOutOfRange { what, index, len } => {
                write!(f, "{what} index {index} out of range 1..={len}")
            }
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Error::FlatDirection => f.write_str("objective is flat in the updated phase"),
            Error::Conditioning { argument } => {
                write!(f, "phase update arcsin argument {argument} is out of range")
            }
            Error::DegenerateChannel(what) => write!(f, "degenerate channel: {what}"),
            Error::EmptyGrid => f.write_str("evaluation grid is empty"),
            Error::SingularMatrix => f.write_str("matrix is numerically singular"),
        }
    }
}

impl core::error::Error for Error {}
