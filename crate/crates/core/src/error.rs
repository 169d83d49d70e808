use crate::point::CPoint;
use thiserror::Error;

/// Errors raised by domain oracles, map chains and the bound pipelines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SqueezeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ray never leaves the domain")]
    Unbounded,
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("slice radius is infinite (a ray in the slice never exits)")]
    UnboundedSlice,
    #[error("point is not on the boundary (residual {residual:e})")]
    NotOnBoundary { residual: f64 },
    #[error("operation requires a smooth domain kind")]
    NonSmoothKind,
    #[error("map chain hit its singular set at atom {atom}")]
    SingularPoint { atom: usize },
    #[error("affine map is not invertible")]
    SingularAffine,
    #[error("envelope row {row} has component {component} of size {value:e}")]
    EnvelopeViolation {
        row: usize,
        component: usize,
        value: f64,
    },
    #[error("nearest boundary point is not unique")]
    NonUniqueNearestPoint,
    #[error("boundary point is not spherically extreme")]
    NotSphericallyExtreme,
    #[error("Hermitian form is not positive definite (smallest eigenvalue {c0:e})")]
    NotStronglyConvex { c0: f64 },
    #[error("the origin is not in the image of the chain")]
    ZeroNotInImage,
    #[error("chain is singular on the closure of the domain")]
    SingularOnClosure,
    #[error("approach point left the domain at t = {t}")]
    PointExited { t: f64 },
    #[error("inclusion {which} violated at {witness}")]
    InclusionViolated { which: String, witness: CPoint },
}

impl SqueezeError {
    /// Stable variant name, printed by the CLI on pipeline failures.
    pub fn name(&self) -> &'static str {
        match self {
            SqueezeError::InvalidInput(_) => "InvalidInput",
            SqueezeError::Unbounded => "Unbounded",
            SqueezeError::UnboundedDomain => "UnboundedDomain",
            SqueezeError::UnboundedSlice => "UnboundedSlice",
            SqueezeError::NotOnBoundary { .. } => "NotOnBoundary",
            SqueezeError::NonSmoothKind => "NonSmoothKind",
            SqueezeError::SingularPoint { .. } => "SingularPoint",
            SqueezeError::SingularAffine => "SingularAffine",
            SqueezeError::EnvelopeViolation { .. } => "EnvelopeViolation",
            SqueezeError::NonUniqueNearestPoint => "NonUniqueNearestPoint",
            SqueezeError::NotSphericallyExtreme => "NotSphericallyExtreme",
            SqueezeError::NotStronglyConvex { .. } => "NotStronglyConvex",
            SqueezeError::ZeroNotInImage => "ZeroNotInImage",
            SqueezeError::SingularOnClosure => "SingularOnClosure",
            SqueezeError::PointExited { .. } => "PointExited",
            SqueezeError::InclusionViolated { .. } => "InclusionViolated",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SqueezeError::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SqueezeError>;
