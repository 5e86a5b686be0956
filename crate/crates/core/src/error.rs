use thiserror::Error;

/// Errors raised by the numerical operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid order {0}: expected 0 < alpha <= 1")]
    InvalidOrder(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("quadrature tolerance not met after {subdivisions} subdivisions (error estimate {estimate:e})")]
    ToleranceNotMet { subdivisions: usize, estimate: f64 },
    #[error("missing analytic derivative: {0}")]
    MissingDerivative(String),
    #[error("supplied derivative disagrees with finite differences: {0}")]
    DerivativeMismatch(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("singular Lagrangian: {0}")]
    SingularLagrangian(String),
    #[error("momentum inconsistent with the Lagrangian: {0}")]
    InconsistentMomentum(String),
    #[error("trajectory is not a certified extremal: {0}")]
    NotAnExtremal(String),
    #[error("force equation violated: {0}")]
    ForceEquationViolated(String),
    #[error("stationarity condition cannot be solved for the control: {0}")]
    StationarityUnsolvable(String),
    #[error("triple is not a certified Pontryagin extremal: {0}")]
    NotCertified(String),
    #[error("boundary condition violated: {0}")]
    BoundaryConditionViolated(String),
}

impl Error {
    /// Whether the error reports a failed iterative or adaptive procedure
    /// rather than bad input.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_) | Error::ToleranceNotMet { .. } | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
