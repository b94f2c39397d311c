//! Spec-driven front end for the `fockline` simulator.
//!
//! A run is described by one JSON object (see [`spec::RunSpec`]) and produces
//! a JSON report or, for sweeps, a CSV table. Output depends only on the spec,
//! so the same spec and seed always give the same bytes.

pub mod error;
pub mod format;
pub mod run;
pub mod spec;

pub use error::{CliError, SpecError};
pub use run::{execute, CSV_HEADER};
pub use spec::{parse_spec, RunSpec};
