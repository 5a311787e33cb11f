use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by [`ErrorClass`] so front ends can map them onto
/// stable exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("geometry has no edges")]
    EmptyEdges,
    #[error("edge {index}: length {value} is not positive; edge lengths must be bounded away from zero")]
    NonPositiveLength { index: usize, value: f64 },
    #[error("edge {index}: branching {value} must exceed 1; every non-root vertex needs at least two forward neighbors")]
    BranchingTooSmall { index: usize, value: f64 },
    #[error("invalid generator: {0}")]
    Generator(String),
    #[error("invalid measure: {0}")]
    Measure(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("evaluation point {position} coincides with an atom")]
    AtomEndpoint { position: f64 },
    #[error("Robin parameter is tangential to the Dirichlet data at the truncation point")]
    Tangential,
    #[error("cannot concatenate an empty sequence of pieces")]
    EmptyPieces,
    #[error("tiling search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: usize },
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
}

/// Coarse classification of [`Error`] values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input violates a modelling assumption or an operation precondition.
    Validation,
    /// A numerical invariant that should hold for valid input was breached.
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Degenerate(_) => ErrorClass::Internal,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
