//! Optical elements compiled to unitaries on a mode registry.

mod circuit;
mod element;
mod unitary;

pub use circuit::Circuit;
pub use element::{pbs_unitary, Element};
pub use unitary::{bs_matrix, rotator_matrix, BsConvention, ModeUnitary};
