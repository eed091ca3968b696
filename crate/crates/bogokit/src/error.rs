//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// Every variant has a stable machine-readable name available through
/// [`Error::reason`], which the command-line front end prints on domain
/// failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFiniteEntry(String),
    #[error("statistics mismatch: both operands must be bosonic or both fermionic")]
    StatisticsMismatch,
    #[error("unsupported representation target: {0}")]
    UnsupportedTarget(String),
    #[error("map does not satisfy the Bogoliubov relations (max residual {0:e})")]
    NotValidated(f64),
    #[error("eigenvectors could not be orthonormalized: {0}")]
    DegenerateBasis(String),
    #[error("expected a bosonic transformation")]
    NotBosonic,
    #[error("expected a fermionic transformation")]
    NotFermionic,
    #[error("eigenspace of |C| with eigenvalue {eigenvalue:e} has odd dimension {dimension}")]
    UnpairedEigenvector { eigenvalue: f64, dimension: usize },
    #[error("tail behaviour is unknown and partial sums cannot decide")]
    UnknownTail,
    #[error("precondition failed: {0}")]
    PrereqFailed(String),
    #[error("bad cutoff: {0}")]
    BadCutoff(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("h is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("||h^(-1/2) k h^(-1/2)|| = {norm} is not below 1")]
    GramTooLarge { norm: f64 },
    #[error("kernel of A_H has odd dimension {dimension}")]
    OddKernel { dimension: usize },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("model constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("gap parameter vanishes")]
    ZeroGap,
    #[error("number of time steps must be at least 1")]
    BadSteps,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier of the variant, e.g. `"GramTooLarge"`.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFiniteEntry(_) => "NonFiniteEntry",
            Error::StatisticsMismatch => "StatisticsMismatch",
            Error::UnsupportedTarget(_) => "UnsupportedTarget",
            Error::NotValidated(_) => "NotValidated",
            Error::DegenerateBasis(_) => "DegenerateBasis",
            Error::NotBosonic => "NotBosonic",
            Error::NotFermionic => "NotFermionic",
            Error::UnpairedEigenvector { .. } => "UnpairedEigenvector",
            Error::UnknownTail => "UnknownTail",
            Error::PrereqFailed(_) => "PrereqFailed",
            Error::BadCutoff(_) => "BadCutoff",
            Error::BadParameter(_) => "BadParameter",
            Error::SymmetryViolation(_) => "SymmetryViolation",
            Error::NotPositive { .. } => "NotPositive",
            Error::GramTooLarge { .. } => "GramTooLarge",
            Error::OddKernel { .. } => "OddKernel",
            Error::NoConvergence(_) => "NoConvergence",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::ZeroGap => "ZeroGap",
            Error::BadSteps => "BadSteps",
            Error::Parse(_) => "Parse",
        }
    }
}
