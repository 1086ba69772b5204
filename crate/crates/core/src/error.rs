use thiserror::Error;

/// Errors shared by all solver modules.
#[derive(Debug, Error)]
pub enum SolverError {
    /// A parameter is outside its admissible range or non-finite.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two functions live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An evaluation would overflow the floating range (guarded exponentials,
    /// dilations beyond what the grid resolves).
    #[error("range error: {0}")]
    RangeError(String),

    /// The fiber map has no interior maximum in the search bracket, so the
    /// input sits outside the mountain-pass regime.
    #[error("geometry error: {0}")]
    GeometryError(String),

    /// Newton refinement hit a singular or non-contracting linearization.
    #[error("refinement error: {0}")]
    RefinementError(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

impl SolverError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SolverError::InvalidArgument(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        SolverError::RangeError(msg.into())
    }
}
