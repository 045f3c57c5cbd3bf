//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter failed validation. Carries the offending field.
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParam {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The continued-ratio iteration hit the order limit before the error
    /// bracket shrank below the requested tolerance.
    #[error(
        "I1 estimate did not converge within {max_order} orders \
         (last bracket: [{lower:e}, {upper:e}])"
    )]
    I1NotConverged {
        max_order: usize,
        lower: f64,
        upper: f64,
    },

    /// Overflow in the forward C/D sequences despite joint rescaling.
    #[error("C/D forward recurrence overflowed at order {order}")]
    CdOverflow { order: usize },

    /// A moment sequence is too short for the requested operation.
    #[error("moment ladder too short: need {needed} entries, have {have}")]
    LadderTooShort { needed: usize, have: usize },

    /// Division by a vanishing moment (vacuum state).
    #[error("vacuum state: {what} undefined (I1 = 0)")]
    VacuumUndefined { what: &'static str },

    /// Requested |alpha| exceeds the range where the truncated series is
    /// trustworthy at the available precision.
    #[error(
        "|alpha| = {requested} outside controllable range at {bits}-bit \
         precision; maximum safe |alpha| = {max_safe}"
    )]
    AlphaOutOfRange {
        requested: f64,
        max_safe: f64,
        bits: u32,
    },

    /// Asymptotic split point below the admissible cutoff.
    #[error("split order {given} below the required cutoff {cutoff}")]
    SplitBelowCutoff { given: usize, cutoff: usize },

    /// Argument outside a function's domain.
    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    /// Fock cutoff too small for the requested moment order.
    #[error("photon cutoff n_ph = {n_ph} too small for moment order {max_n}")]
    CutoffTooSmall { n_ph: usize, max_n: usize },

    /// Estimated Fock truncation bias exceeds the requested tolerance.
    #[error(
        "truncation bias estimate {bias:e} above tolerance {tol:e}; \
         increase n_ph beyond {n_ph}"
    )]
    TruncationBias { bias: f64, tol: f64, n_ph: usize },

    /// The steady-state solve found a numerically degenerate null space.
    #[error("degenerate Liouvillian null space: {0}")]
    DegenerateSteadyState(String),

    /// Dense linear-algebra backend failure.
    #[error("linear algebra error: {0}")]
    LinAlg(String),

    /// Time integration failed.
    #[error("ODE integration error: {0}")]
    Integration(String),

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::LinAlg(e.to_string())
    }
}
