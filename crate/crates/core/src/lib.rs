//! Exact simulation of few-photon linear-optics experiments.
//!
//! States are sparse superpositions of bosonic occupation vectors over a
//! registry of `(path, polarization, tag)` modes. Optical elements compile to
//! unitaries on that registry, evolution expands transformed creation
//! operators exactly, and detection patterns post-select conditional density
//! matrices of the undetected paths. Distinguishability tags are never
//! observable: they are traced out at every detection.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod fock;
pub mod measurement;
pub mod optics;
pub mod par;

pub use error::{Error, Result};
pub use par::Exec;

pub use num_complex::Complex64;

/// Amplitudes with magnitude below this are dropped from sparse states.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Maximum allowed drift of the squared norm away from its expected value.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Maximum entry-wise deviation of `U†U` from the identity.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Maximum entry-wise deviation of a density matrix from its adjoint.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
