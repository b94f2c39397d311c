//! Modes, sparse bosonic Fock states and tag-blind density matrices.

mod density;
mod mode;
mod occupation;
mod polarization;
mod state;

pub use density::DensityMatrix;
pub use mode::{Mode, ModeRegistry, Pol, Tag, DEFAULT_TAG};
pub use occupation::{BlindOccupation, OccupationVector, PathPol};
pub use polarization::{linear, reduce_angle, PolarizationState};
pub use state::{inner_amplitudes, norm_sqr, prune, Amplitudes, PureState};

pub(crate) use density::reduce;
pub(crate) use state::same_registry;
