//! Quantum Fisher information about the coupling `wx` of a two-level probe
//! with Hamiltonian `H = omega . sigma / 2`, `omega = (wx, 0, wz)`.
//!
//! Two read-out protocols are compared: free precession, and precession
//! interrupted every `tau` by a non-demolition measurement of `sigma_z`,
//! which erases the transverse polarization and makes the longitudinal one
//! decay. Closed forms live in [`qfi`]; [`oracle`] recomputes everything
//! from density matrices.

pub mod bloch;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod qfi;
pub mod specfun;
pub mod spins;
pub mod validation;

pub use bloch::{MeasurementSchedule, PolarizationVector, PrecessionFrequency};
pub use error::{Error, Result};
pub use qfi::{Formula, ProjectedFormula, Protocol, QfiEvaluation};
pub use specfun::PolarizationMagnitude;
