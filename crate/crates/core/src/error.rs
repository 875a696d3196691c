use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A length or shape did not match what the operation requires.
    DimensionMismatch { expected: usize, found: usize },
    /// Thin QR found a column numerically dependent on the previous ones.
    RankDeficient { column: usize },
    /// A triangular or pivoted solve hit a (near-)zero pivot.
    Singular { index: usize },
    /// The Arnoldi start vector vanished.
    ZeroStartVector,
    /// The projected small system `(I − M Mᵀ) R y = b̂` is singular at this iteration.
    SmallSystemSingular { iteration: usize },
    /// A parameter was outside its admissible range.
    InvalidArgument(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::RankDeficient { column } => {
                write!(f, "matrix is numerically rank deficient at column {column}")
            }
            Error::Singular { index } => write!(f, "singular system: zero pivot at index {index}"),
            Error::ZeroStartVector => write!(f, "Arnoldi start vector is zero"),
            Error::SmallSystemSingular { iteration } => {
                write!(f, "projected small system is singular at iteration {iteration}")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

impl core::error::Error for Error {}
