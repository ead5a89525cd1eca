use thiserror::Error;

/// Errors raised by the simulator.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady state is not unique: Liouvillian null space has dimension {nullity}")]
    DegenerateSteadyState { nullity: usize },

    #[error("trace-constrained steady-state system is singular ({detail})")]
    SingularSolve { detail: String },

    #[error("time evolution not converged: |rho(t_max) - rho(t_max/2)|_max = {metric:e}")]
    NotConverged { metric: f64 },

    #[error("at detuning {detuning}: {source}")]
    AtDetuning {
        detuning: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at theta {theta}: {source}")]
    AtTheta {
        theta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips scan annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtDetuning { source, .. } | Error::AtTheta { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
