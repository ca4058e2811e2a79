use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not diagonalizable (eigenvector singular value ratio {ratio:.3e})")]
    NotDiagonalizable { ratio: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("mode {mode} requested with nonzero constant but |<b_j|psi>| = {magnitude:.3e}")]
    ZeroModalCoefficient { mode: usize, magnitude: f64 },

    #[error("step too large: dt * |h| / hbar = {ratio:.3e} exceeds 0.5")]
    StepTooLarge { ratio: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("parameters (x, y, z) = ({x}, {y}, {z}) are outside the real-spectrum regime")]
    OutsideRealRegime { x: f64, y: f64, z: f64 },

    #[error("continuity check needs at least 3 snapshots, got {found}")]
    InsufficientSnapshots { found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidMatrix(_) => "invalid_matrix",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotDiagonalizable { .. } => "not_diagonalizable",
            Error::NoConvergence => "no_convergence",
            Error::ZeroModalCoefficient { .. } => "zero_modal_coefficient",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::NonFinite { .. } => "non_finite",
            Error::OutsideRealRegime { .. } => "outside_real_regime",
            Error::InsufficientSnapshots { .. } => "insufficient_snapshots",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
