use thiserror::Error;

/// Errors raised by the library. The CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("projection m = {m} is not a valid projection for J = {j}")]
    ProjectionOutOfRange { j: f64, m: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("polarization vector has norm {0}, expected 1")]
    NonUnitPolarization(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("signal derivative {0:e} is too small to convert into a phase uncertainty")]
    StationaryPoint(f64),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("degenerate quantity: {0}")]
    Degenerate(String),
    #[error("unsupported noise model: {0}")]
    UnsupportedModel(String),
}

impl SpinError {
    /// Errors caused by bad input rather than by a numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            SpinError::ProjectionOutOfRange { .. }
                | SpinError::DimensionMismatch { .. }
                | SpinError::NonUnitPolarization(_)
                | SpinError::InvalidConfig(_)
                | SpinError::InsufficientData(_)
                | SpinError::UnsupportedModel(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SpinError>;
