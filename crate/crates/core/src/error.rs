use thiserror::Error;

use crate::lattice::LatticePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: domain has dimension {expected}, point has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0} is not an interior point of the domain")]
    NotInterior(LatticePoint),

    #[error("unsupported domain for this operation: {0}")]
    UnsupportedDomain(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("cosine product {0} lies outside [-1, 1]")]
    OutOfRange(f64),

    #[error("the {0}-dimensional diagonal walk is recurrent, so its lattice Green function diverges (need d >= 3)")]
    RecurrentLattice(usize),

    #[error("{states} interior states exceed the linear-solve cap of {cap}")]
    TooLarge { states: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors caused by a malformed request rather than by the
    /// computation itself.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotInterior(_)
                | Error::UnsupportedDomain(_)
                | Error::InvalidDomain(_)
                | Error::OutOfRange(_)
                | Error::InvalidConfig(_)
        )
    }
}
