use thiserror::Error;

/// Errors raised across the toolkit.
///
/// State and row indices carried by variants are 1-based, matching the text
/// file formats and the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension {0} is too small (need at least 2 states)")]
    DimensionTooSmall(usize),
    #[error("negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("row {0} sums to {1}, outside tolerance")]
    RowSumOutOfTolerance(usize, f64),
    #[error("distribution sums to {0}, outside tolerance")]
    NotADistribution(f64),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chain is not ergodic")]
    NotErgodic,
    #[error("chain is not reversible with respect to the supplied distribution")]
    NotReversible,
    #[error("state {0} has zero stationary mass")]
    ZeroStationaryMass(usize),
    #[error("state {index} is outside [1, {dim}]")]
    StateOutOfRange { index: i64, dim: usize },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("dimension {0} is too large for exhaustive computation")]
    DimensionTooLargeForExact(usize),
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("{0} out of range")]
    OutOfRange(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("perturbation leaves the simplex")]
    PerturbationOutOfSimplex,
    #[error("support violation at state {0}: p > 0 where q = 0")]
    SupportViolation(usize),
    #[error("word space of size {0} is too large for exact enumeration")]
    TooLargeForExact(u128),
    #[error("risk curve never reaches the target risk")]
    NoCrossing,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotSquare => "NotSquare",
            Error::DimensionTooSmall(_) => "DimensionTooSmall",
            Error::NegativeEntry(..) => "NegativeEntry",
            Error::RowSumOutOfTolerance(..) => "RowSumOutOfTolerance",
            Error::NotADistribution(_) => "NotADistribution",
            Error::NonFinite(..) => "NonFinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotErgodic => "NotErgodic",
            Error::NotReversible => "NotReversible",
            Error::ZeroStationaryMass(_) => "ZeroStationaryMass",
            Error::StateOutOfRange { .. } => "StateOutOfRange",
            Error::EmptyTrajectory => "EmptyTrajectory",
            Error::DimensionTooLargeForExact(_) => "DimensionTooLargeForExact",
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::OutOfRange(_) => "OutOfRange",
            Error::InvalidParams(_) => "InvalidParams",
            Error::PerturbationOutOfSimplex => "PerturbationOutOfSimplex",
            Error::SupportViolation(_) => "SupportViolation",
            Error::TooLargeForExact(_) => "TooLargeForExact",
            Error::NoCrossing => "NoCrossing",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
