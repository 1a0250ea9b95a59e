use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the measure, transform and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {0} lies on a branch cut")]
    BranchCut(Complex64),

    #[error("point {0} lies inside the continuous support")]
    InsideSupport(Complex64),

    #[error("inversion did not converge at w = {w} (residual {residual:.3e}); shrink the domain radius")]
    DomainTooLarge { w: Complex64, residual: f64 },

    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),

    #[error("total mass drifted to {mass} (tolerance {tolerance:e})")]
    NormalizationDrift { mass: f64, tolerance: f64 },

    #[error("measure recovery failed: {0}")]
    RecoveryFailed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `true` for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DomainTooLarge { .. }
                | Error::NonConvergence(_)
                | Error::NormalizationDrift { .. }
                | Error::RecoveryFailed(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
