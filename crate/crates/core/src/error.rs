use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error kinds shared by every numerical routine in the crate.
///
/// [`Error::is_validation`] separates bad input (malformed expressions,
/// violated preconditions) from failures that happen while computing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input {0}")]
    NonFinite(String),

    #[error("curve is not closed: endpoint gap {gap:e} exceeds {tol:e}")]
    NotClosed { gap: f64, tol: f64 },

    #[error("curve is not regular at t = {t}: tangent norm {norm:e}")]
    Irregular { t: f64, norm: f64 },

    #[error("lift displacement is {residual:e} away from a whole lap")]
    LapResidual { residual: f64 },

    #[error("curves live on different spaces")]
    MismatchedTargets,

    #[error("vector field vanishes near ({x}, {y}): norm {norm:e}")]
    ZeroOfField { x: f64, y: f64, norm: f64 },

    #[error("singular jacobian at ({x}, {y}): det {det:e}")]
    SingularJacobian { x: f64, y: f64, det: f64 },

    #[error("could not invert map at ({x}, {y}): residual {residual:e}")]
    InverseFailed { x: f64, y: f64, residual: f64 },

    #[error("{what} did not converge after {panels} panels (last change {delta:e})")]
    NonConvergence {
        what: &'static str,
        panels: usize,
        delta: f64,
    },

    #[error("angle jump {jump} between consecutive samples at finest grid {panels}")]
    AngleJump { jump: f64, panels: usize },

    #[error("index value {raw} is {residual:e} away from the nearest integer")]
    NotInteger { raw: f64, residual: f64 },

    #[error("quadrature ({quadrature}) and unwrap ({unwrap}) disagree by {delta:e}")]
    OracleDisagreement { quadrature: f64, unwrap: f64, delta: f64 },

    #[error("gradient field is not integrable: curl residual {residual:e} exceeds {tol:e}")]
    NotIntegrable { residual: f64, tol: f64 },

    #[error("path-dependent integration: disagreement {disagreement:e} exceeds {tol:e}")]
    PathDependent { disagreement: f64, tol: f64 },

    #[error("radius factor {radius} is not positive at ({x}, {y})")]
    OutsideStrip { x: f64, y: f64, radius: f64 },
}

impl Error {
    /// True for errors caused by malformed input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::InvalidParameter(_) | Error::NonFinite(_) | Error::MismatchedTargets
        )
    }

    /// Stable snake_case tag for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Eval(_) => "eval",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonFinite(_) => "non_finite",
            Error::NotClosed { .. } => "not_closed",
            Error::Irregular { .. } => "irregular",
            Error::LapResidual { .. } => "lap_residual",
            Error::MismatchedTargets => "mismatched_targets",
            Error::ZeroOfField { .. } => "zero_of_field",
            Error::SingularJacobian { .. } => "singular_jacobian",
            Error::InverseFailed { .. } => "inverse_failed",
            Error::NonConvergence { .. } => "non_convergence",
            Error::AngleJump { .. } => "angle_jump",
            Error::NotInteger { .. } => "not_integer",
            Error::OracleDisagreement { .. } => "oracle_disagreement",
            Error::NotIntegrable { .. } => "not_integrable",
            Error::PathDependent { .. } => "path_dependent",
            Error::OutsideStrip { .. } => "outside_strip",
        }
    }
}
