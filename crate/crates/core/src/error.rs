use thiserror::Error;

/// Errors surfaced by the library.
///
/// The first three variants describe bad inputs; [`Error::Numerical`] marks an
/// internal inconsistency (a decomposition that failed to converge, a
/// cross-check that disagreed) and should never be seen for well-formed data.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix shapes do not agree with each other or with the declared map
    /// dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter lies outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input that must be unitary is not, within the validation tolerance.
    #[error("not unitary: {0}")]
    NotUnitary(String),

    /// An internal numerical routine failed or produced inconsistent results.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
