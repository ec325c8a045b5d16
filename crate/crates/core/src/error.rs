//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building models or running solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operators (or an operator and a state) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    /// A matrix that must be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} ({context})")]
    NonHermitian { deviation: f64, context: &'static str },

    /// The detuning is zero, so the adiabatic elimination is undefined.
    #[error("detuning is zero: adiabatic-elimination quantities are undefined")]
    ZeroDetuning,

    /// A state invariant (trace, Hermiticity, positivity) was violated mid-run.
    #[error("integration failure at t = {t_us} us: {what} deviates by {magnitude:.3e}")]
    IntegrationFailure {
        t_us: f64,
        what: &'static str,
        magnitude: f64,
    },

    /// The Liouvillian kernel is not one-dimensional.
    #[error("degenerate steady state: null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    /// The steady-state integration did not converge within the time cap.
    #[error("no steady-state convergence within {cap_us} us (last window diff {last_diff:.3e})")]
    SteadyStateTimeout { cap_us: f64, last_diff: f64 },

    /// An observable is undefined for the given state.
    #[error("undefined observable: {0}")]
    UndefinedObservable(String),

    /// A dense linear-algebra routine failed.
    #[error("linear algebra error: {0}")]
    Linalg(String),

    /// A sweep point failed; carries the grid context.
    #[error("sweep point {parameter} = {value} failed: {source}")]
    SweepPoint {
        parameter: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
