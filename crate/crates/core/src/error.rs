use thiserror::Error;

/// Errors raised by the analytic, optimization and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponential term needs at least one polynomial coefficient")]
    EmptyCoefficients,

    #[error("exponential term has non-finite rate {0}")]
    NonFiniteRate(f64),

    #[error("divergent integral: term with rate {0} <= 0")]
    DivergentIntegral(f64),

    #[error("utilization {0} outside (0, 1)")]
    InvalidUtilization(f64),

    #[error("unstable server {index}: utilization {rho} >= 1")]
    UnstableServer { index: usize, rho: f64 },

    #[error("service rate {0} must be finite and positive")]
    InvalidServiceRate(f64),

    #[error("arrival rate {0} must be finite and positive")]
    InvalidArrivalRate(f64),

    #[error("routing probabilities invalid: {0}")]
    InvalidRouting(String),

    #[error("gamma parameter theta {0} must be finite and positive")]
    InvalidTheta(f64),

    #[error("no active servers")]
    NoActiveServers,

    #[error("infeasible arrival budget {budget}: minimum load is {required}")]
    InfeasibleBudget { budget: f64, required: f64 },

    #[error("root not bracketed in [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
    QuadratureFailed { error: f64, intervals: usize },

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("histogram holds no samples")]
    EmptyHistogram,

    #[error("replicate count must be at least 1")]
    InvalidReplicates,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of a numerical routine rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootNotBracketed { .. } | Error::QuadratureFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
