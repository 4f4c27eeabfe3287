use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H - H^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dimension {0}; at least 2 is required")]
    InvalidDimension(usize),

    #[error("truncation at {levels} Fock levels leaves deficit {deficit:e} above bound {bound:e}")]
    TruncationTooSmall {
        levels: usize,
        deficit: f64,
        bound: f64,
    },

    #[error("the set of states to filter out is empty")]
    EmptyOtherSet,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("insufficient probe power; at least {n_min} mean photons are required")]
    InsufficientPower { n_min: f64 },

    #[error("malformed matrix data: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
