use std::fmt;

use crate::numerics::Trajectory;

/// Reason an expression could not be evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainError {
    pub reason: &'static str,
}

impl DomainError {
    pub(crate) const fn new(reason: &'static str) -> Self {
        Self { reason }
    }
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain error: {}", self.reason)
    }
}

impl std::error::Error for DomainError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("region unusable for `{what}`: only {evaluable} of {total} sample points are evaluable")]
    RegionUnusable {
        what: String,
        evaluable: usize,
        total: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("surface invariant violated: {0}")]
    InvariantViolation(String),

    #[error("vector field is parallel to A on {parallel} of {evaluated} sample points")]
    DegenerateField { parallel: usize, evaluated: usize },

    #[error("surface is not flat: {0}")]
    NotFlat(String),

    #[error("curvature is not constant on the region (min {min}, max {max}, mean {mean})")]
    NotConstantCurvature { min: f64, max: f64, mean: f64 },

    #[error("delta = {delta} vanishes inside the region; shrink the region")]
    DeltaVanishesOnRegion { delta: String },

    #[error("`{mu}` is not an integrating factor: closedness residual reaches {residual:e} at ({x}, {u})")]
    NotIntegratingFactor {
        mu: String,
        residual: f64,
        x: f64,
        u: f64,
    },

    #[error("residual check failed: {what} reaches {residual:e}, limit {limit:e}")]
    ResidualCheckFailed {
        what: String,
        residual: f64,
        limit: f64,
    },

    #[error("trajectory left the domain near x = {x}: {reason}")]
    LeftDomain {
        x: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("Brioschi stencil around ({x}, {u}) leaves the domain: {source}")]
    StencilLeftDomain {
        x: f64,
        u: f64,
        source: DomainError,
    },

    #[error("quadrature path crosses a singularity: {0}")]
    PathCrossesSingularity(DomainError),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::InvalidArgument(_) => 2,
            Error::InvalidRegion(_)
            | Error::RegionUnusable { .. }
            | Error::Domain(_)
            | Error::DegenerateField { .. }
            | Error::DeltaVanishesOnRegion { .. }
            | Error::LeftDomain { .. }
            | Error::StencilLeftDomain { .. }
            | Error::PathCrossesSingularity(_) => 3,
            Error::NotFlat(_) | Error::NotConstantCurvature { .. } => 4,
            Error::NotIntegratingFactor { .. }
            | Error::ResidualCheckFailed { .. }
            | Error::InvariantViolation(_) => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
