//! Steady-state correlations of an incoherently pumped two-level emitter in
//! a lossy single-mode cavity.
//!
//! The crate solves the steady state of the emitter–cavity moment hierarchy
//! through a three-term recurrence with rigorous boundary conditions (O(N)
//! in the cutoff order), back-substitutes the joint emitter–field moments,
//! evaluates moment-based nonclassicality and entanglement criteria, and
//! computes the field's normally ordered characteristic function. A
//! brute-force truncated-Fock Liouvillian serves as an independent
//! cross-validation oracle and benchmark baseline.

pub mod charfunc;
pub mod criteria;
pub mod error;
pub mod moments;
pub mod oracle;
pub mod params;
pub mod recurrence;
pub mod scalar;

pub use error::{Error, Result};
pub use params::{SystemParams, Units};
pub use recurrence::{RecurrenceCoeffs, SolveOptions};
pub use scalar::Precision;
