use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated an operation's precondition.
    InvalidInput(String),
    /// Two objects that must agree in size do not.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A grid cell index outside the 3×4 layout.
    CellOutOfRange { row: usize, col: usize },
    /// A filter set or sound bank is missing an entry or is inconsistent.
    Hrir(String),
    /// Standardization requires spread on both axes.
    ZeroVariance { axis: usize },
    /// Trial metrics were requested for a log without a finish record.
    IncompleteTrial,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::CellOutOfRange { row, col } => {
                write!(f, "cell ({row}, {col}) is outside the 3x4 grid")
            }
            Error::Hrir(msg) => write!(f, "hrir: {msg}"),
            Error::ZeroVariance { axis } => write!(f, "axis {axis} has zero variance"),
            Error::IncompleteTrial => f.write_str("trial log has no finish record"),
        }
    }
}

impl core::error::Error for Error {}
