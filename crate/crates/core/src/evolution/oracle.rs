use nalgebra::DMatrix;
use num_complex::Complex64;

use super::permanent::{permanent, MAX_PERMANENT_DIM};
use crate::fock::OccupationVector;
use crate::optics::ModeUnitary;
use crate::{Error, Result};

/// A single `⟨output| U |input⟩` transition amplitude.
#[derive(Debug, Clone)]
pub struct TransitionQuery<'a> {
    pub unitary: &'a ModeUnitary,
    pub input: OccupationVector,
    pub output: OccupationVector,
}

/// `Per(U_sub) / √(∏ s_i! ∏ t_j!)`, where `U_sub` repeats column `j` of `U`
/// once per input photon in mode `j` and row `i` once per output photon in
/// mode `i`.
///
/// Shares nothing with [`apply`](super::apply); it exists to cross-check it.
pub fn amplitude_oracle(q: &TransitionQuery<'_>) -> Result<Complex64> {
    let n_in = q.input.n_total();
    let n_out = q.output.n_total();
    if n_in != n_out {
        return Err(Error::config(format!(
            "photon number mismatch: {n_in} in, {n_out} out"
        )));
    }
    if n_in as usize > MAX_PERMANENT_DIM {
        return Err(Error::config(format!(
            "{n_in} photons exceed the oracle limit of {MAX_PERMANENT_DIM}"
        )));
    }
    let dim = q.unitary.dim();
    if let Some(m) = q
        .input
        .iter()
        .chain(q.output.iter())
        .map(|(m, _)| m)
        .find(|&m| m >= dim)
    {
        return Err(Error::config(format!("mode {m} outside a {dim}-mode unitary")));
    }
    let rows = q.output.photons();
    let cols = q.input.photons();
    let u = q.unitary.matrix();
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]);
    let norm = (q.input.factorial_product() * q.output.factorial_product()).sqrt();
    Ok(permanent(&sub)? / norm)
}
