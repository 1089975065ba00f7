use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("index {index} out of bounds for {what} of size {len}")]
    IndexOutOfBounds {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("basis dimension {dim} exceeds the configured limit {limit}")]
    BasisTooLarge { dim: u128, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not diagonal in the occupation basis")]
    NotDiagonal,

    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("occupation {occupation:?} is not in the truncated basis")]
    NotInBasis { occupation: Vec<u32> },

    #[error("integration failed at t = {time}: {reason}")]
    IntegrationFailed { time: f64, reason: String },

    #[error("decay fit rejected: {reason}")]
    FitRejected { reason: String },

    #[error("ensemble deviation {deviation:e} exceeds Monte Carlo band {band:e}")]
    OutsideMonteCarloBand { deviation: f64, band: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
