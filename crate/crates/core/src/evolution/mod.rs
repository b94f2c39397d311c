//! Exact evolution of Fock states under mode unitaries.
//!
//! [`apply`] substitutes every creation operator by its image
//! `a†_j → Σ_i U_ij a†_i` and expands the product term by term. The
//! permanent-based [`amplitude_oracle`] computes the same amplitudes through
//! an unrelated route.

mod oracle;
mod permanent;

use std::collections::BTreeMap;

use num_complex::Complex64;

pub use oracle::{amplitude_oracle, TransitionQuery};
pub use permanent::{permanent, permanent_naive, MAX_NAIVE_DIM, MAX_PERMANENT_DIM};

use crate::fock::{norm_sqr, prune, same_registry, Amplitudes, OccupationVector, PureState};
use crate::optics::ModeUnitary;
use crate::par::{self, Exec};
use crate::{Error, Result, NORM_TOLERANCE};

/// Below this many input terms the expansion stays on the calling thread.
const PARALLEL_MIN_TERMS: usize = 64;

/// Evolves `state` through `u`, checking norm preservation.
pub fn apply(state: &PureState, u: &ModeUnitary) -> Result<PureState> {
    let exec = if state.len() >= PARALLEL_MIN_TERMS {
        Exec::default()
    } else {
        Exec::Sequential
    };
    apply_with(state, u, exec)
}

pub fn apply_with(state: &PureState, u: &ModeUnitary, exec: Exec) -> Result<PureState> {
    same_registry(state.registry(), u.registry())?;
    let before = state.norm_sqr();
    let out = evolve_amplitudes(state.amplitudes(), u, exec);
    let after = norm_sqr(&out);
    if (after - before).abs() > NORM_TOLERANCE {
        return Err(Error::numerical(format!(
            "evolution changed the squared norm from {before} to {after}"
        )));
    }
    PureState::from_amplitudes(state.registry().clone(), out)
}

/// Linear map on raw amplitudes (no normalization checks). Output amplitudes
/// below the prune threshold are dropped.
///
/// Each input term expands independently; partial results are merged in
/// input order so the output never depends on the schedule.
pub fn evolve_amplitudes(terms: &Amplitudes, u: &ModeUnitary, exec: Exec) -> Amplitudes {
    let columns: Vec<Vec<(usize, Complex64)>> =
        (0..u.dim()).map(|j| u.column_support(j)).collect();
    let inputs: Vec<(&OccupationVector, Complex64)> =
        terms.iter().map(|(k, a)| (k, *a)).collect();
    let partials = par::map(exec, &inputs, |(occ, amp)| expand_term(occ, *amp, &columns));

    let mut out = Amplitudes::new();
    for partial in partials {
        for (k, a) in partial {
            *out.entry(k).or_default() += a;
        }
    }
    prune(out)
}

/// `amp · ∏_j (Σ_i U_ij a†_i)^{n_j} / √(∏ n_j!)` applied to the vacuum.
fn expand_term(
    occ: &OccupationVector,
    amp: Complex64,
    columns: &[Vec<(usize, Complex64)>],
) -> BTreeMap<OccupationVector, Complex64> {
    let photons = occ.photons();
    let mut raw: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    let mut chosen = Vec::with_capacity(photons.len());
    expand_rec(&photons, columns, &mut chosen, amp, &mut raw);

    let inv_in = 1.0 / occ.factorial_product().sqrt();
    let mut out = BTreeMap::new();
    for (modes, coeff) in raw {
        let target = OccupationVector::from_photons(modes);
        // (a†)^m |0⟩ = √(m!) |m⟩
        let scale = target.factorial_product().sqrt() * inv_in;
        *out.entry(target).or_default() += coeff * scale;
    }
    out
}

fn expand_rec(
    photons: &[usize],
    columns: &[Vec<(usize, Complex64)>],
    chosen: &mut Vec<usize>,
    coeff: Complex64,
    acc: &mut BTreeMap<Vec<usize>, Complex64>,
) {
    let k = chosen.len();
    if k == photons.len() {
        let mut key = chosen.clone();
        key.sort_unstable();
        *acc.entry(key).or_default() += coeff;
        return;
    }
    for &(row, u) in &columns[photons[k]] {
        chosen.push(row);
        expand_rec(photons, columns, chosen, coeff * u, acc);
        chosen.pop();
    }
}
