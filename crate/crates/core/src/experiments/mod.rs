//! Prebuilt protocols: three-photon steering and its controls, and a CHSH
//! baseline on the entangled pair.

mod chsh;
mod steering;

pub use chsh::{
    chsh, chsh_sampled, correlation, ChshResult, ChshSettings, Correlation, SampledChsh,
    SampledCorrelation,
};
pub use steering::{
    all_coincidences, build_steering, nu1_paths, predicted_nu1, predicted_nu1_angle_deg,
    run_steering, sweep_c, sweep_c_with, SteeringConfig, SteeringReport, SteeringSetup, SweepRow,
    TagMode, CROSS_PATTERNS, DET_1, DET_1X, DET_2, DET_2X, DET_3, DET_3X, NU1, NU2, NU3,
    TIMING_NOTE,
};
