//! Detection patterns, post-selection and state analysis.
//!
//! Detectors count photons per path, optionally behind a polarizer, and never
//! resolve distinguishability tags. Post-selecting on a pattern yields its
//! probability and the conditional state of the undetected paths.

mod analysis;
mod pattern;
mod sampler;

use std::borrow::Cow;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use analysis::{
    fidelity, polarization_angle, purity, LINEAR_PHASE_TOLERANCE, PURE_TOLERANCE,
};
pub use pattern::{count_patterns, DetectionPattern, PathRequirement};
pub use sampler::{detection_distribution, sample_distribution, sample_events, sample_events_with, SampleCounts};

use crate::evolution::evolve_amplitudes;
use crate::fock::{reduce, Amplitudes, BlindOccupation, DensityMatrix, PureState};
use crate::optics::{Element, ModeUnitary};
use crate::{Error, Exec, Result};

/// Patterns with probability at or below this cannot be conditioned on.
pub const MIN_CONDITIONING_PROBABILITY: f64 = 1e-12;

/// Outcome of post-selecting a state on a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalResult {
    pub probability: f64,
    /// State of the undetected paths given the pattern, tags traced out.
    pub conditional: DensityMatrix,
    pub pattern: DetectionPattern,
}

/// Probability that a tag-blind detector bank reports `pattern`.
pub fn pattern_probability(state: &PureState, pattern: &DetectionPattern) -> Result<f64> {
    pattern.validate(state.registry())?;
    let terms = analysis_frame(state, pattern)?;
    let registry = state.registry();
    Ok(terms
        .iter()
        .filter(|(occ, _)| pattern.matches(occ, registry))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Projects onto `pattern`, traces out everything but the undetected paths
/// (and all tags) and renormalizes.
pub fn conditional_state(state: &PureState, pattern: &DetectionPattern) -> Result<ConditionalResult> {
    pattern.validate(state.registry())?;
    let terms = analysis_frame(state, pattern)?;
    let registry = state.registry();
    let matching: Vec<(_, _)> = terms
        .iter()
        .filter(|(occ, _)| pattern.matches(occ, registry))
        .collect();
    let probability: f64 = matching.iter().map(|(_, a)| a.norm_sqr()).sum();
    if probability <= MIN_CONDITIONING_PROBABILITY {
        return Err(Error::ZeroSupport { probability });
    }
    let conditional = if pattern.undetected_paths().is_empty() {
        DensityMatrix::new(
            vec![BlindOccupation::default()],
            DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        )?
    } else {
        reduce(
            registry,
            matching,
            pattern.undetected_paths(),
            probability,
        )?
    };
    Ok(ConditionalResult {
        probability,
        conditional,
        pattern: pattern.clone(),
    })
}

/// Rotates every filtered path so its filter axis lies along `H`.
fn analysis_frame<'a>(state: &'a PureState, pattern: &DetectionPattern) -> Result<Cow<'a, Amplitudes>> {
    let mut filters = pattern.filters().peekable();
    if filters.peek().is_none() {
        return Ok(Cow::Borrowed(state.amplitudes()));
    }
    let registry = state.registry();
    let mut u = ModeUnitary::identity(registry.clone());
    for (path, axis) in filters {
        u = u.then(&Element::rotator(path, -axis).unitary(registry)?)?;
    }
    Ok(Cow::Owned(evolve_amplitudes(
        state.amplitudes(),
        &u,
        Exec::Sequential,
    )))
}
