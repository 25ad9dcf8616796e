use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error(
        "quadrature did not converge: error estimate {error_estimate:.3e} above tolerance \
         {tolerance:.3e} after {subdivisions} subdivisions"
    )]
    NonConvergence {
        error_estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no bound state: the impurity strength is zero")]
    NoBoundState,

    #[error("second derivative of the heat flux does not exist at zero field")]
    UndefinedAtOrigin,

    #[error("correlation window of {len} sites exceeds the limit of {max}")]
    WindowTooLarge { len: usize, max: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("truncation needs {required} bytes, limit is {limit}")]
    ResourceLimit { required: usize, limit: usize },

    #[error("time {time} exceeds the reflection-free horizon {horizon}")]
    TimeHorizonExceeded { time: f64, horizon: f64 },

    #[error("{what}: routes disagree by {discrepancy:.3e} (allowed {allowed:.3e})")]
    RouteMismatch {
        what: &'static str,
        discrepancy: f64,
        allowed: f64,
    },
}

impl Error {
    /// Stable machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid_interval",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NoBoundState => "no_bound_state",
            Error::UndefinedAtOrigin => "undefined_at_origin",
            Error::WindowTooLarge { .. } => "window_too_large",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::TimeHorizonExceeded { .. } => "time_horizon_exceeded",
            Error::RouteMismatch { .. } => "route_mismatch",
        }
    }
}
