use thiserror::Error;

/// Errors produced by the simulation stack.
///
/// Variants map one-to-one onto the failure classes the command line tool
/// turns into exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller supplied arguments that violate an operation's contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// Run parameters are inconsistent with the numerical scheme (stability
    /// bounds, CFL conditions, energy drift budgets).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A computation diverged or lost a conserved quantity.
    #[error("numerical stability error: {0}")]
    NumericalStability(String),

    /// A discretization is too coarse to meet the stated accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// An input lies outside the domain the method is defined on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Signed-weight cancellation left no usable signal.
    #[error("sign collapse: mean sign {mean_sign:.3e} below floor {floor:.3e} (effective sample size {ess:.1} of {n})")]
    SignCollapse {
        mean_sign: f64,
        floor: f64,
        ess: f64,
        n: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
