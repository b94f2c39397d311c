use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;

use super::density::{self, DensityMatrix};
use super::mode::{ModeRegistry, Pol, Tag, DEFAULT_TAG};
use super::occupation::OccupationVector;
use super::polarization::{linear, reduce_angle};
use crate::{Error, Result, NORM_TOLERANCE, PRUNE_THRESHOLD};

/// Sparse amplitude map in canonical (ordered) iteration order.
pub type Amplitudes = BTreeMap<OccupationVector, Complex64>;

/// Normalized pure state with a fixed photon number.
#[derive(Debug, Clone)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    terms: Amplitudes,
}

impl PureState {
    /// Validates an amplitude map: prunes tiny terms, then requires a common
    /// photon number, in-range modes and unit norm.
    pub fn from_amplitudes(registry: Arc<ModeRegistry>, terms: Amplitudes) -> Result<Self> {
        let terms = prune(terms);
        check_terms(&registry, &terms)?;
        let norm = norm_sqr(&terms);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::numerical(format!(
                "squared norm {norm} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(PureState { registry, terms })
    }

    /// Rescales an arbitrary nonzero amplitude map to unit norm.
    pub fn normalized(registry: Arc<ModeRegistry>, terms: Amplitudes) -> Result<Self> {
        let norm = norm_sqr(&terms).sqrt();
        if norm <= PRUNE_THRESHOLD || !norm.is_finite() {
            return Err(Error::config("cannot normalize a zero state"));
        }
        let terms = terms.into_iter().map(|(k, a)| (k, a / norm)).collect();
        Self::from_amplitudes(registry, terms)
    }

    pub fn vacuum(registry: Arc<ModeRegistry>) -> Self {
        let mut terms = Amplitudes::new();
        terms.insert(OccupationVector::vacuum(), Complex64::new(1.0, 0.0));
        PureState { registry, terms }
    }

    /// One photon on `path` with tag `tag`, linearly polarized at
    /// `pol_angle` radians: `cos θ |H⟩ + sin θ |V⟩`.
    pub fn single_photon(
        registry: Arc<ModeRegistry>,
        path: &str,
        pol_angle: f64,
        tag: Tag,
    ) -> Result<Self> {
        check_angle(pol_angle)?;
        let [c, s] = linear(reduce_angle(pol_angle));
        let h = registry.require(path, Pol::H, tag)?;
        let v = registry.require(path, Pol::V, tag)?;
        let terms = [(h, c), (v, s)]
            .into_iter()
            .map(|(m, a)| (OccupationVector::from_photons([m]), Complex64::new(a, 0.0)))
            .collect();
        Self::from_amplitudes(registry, terms)
    }

    /// Polarization-entangled pair `(|a⟩|a⟩ + |a⊥⟩|a⊥⟩)/√2` on two paths,
    /// expanded in the lab basis. Both photons carry the default tag.
    pub fn epr_pair(
        registry: Arc<ModeRegistry>,
        path1: &str,
        path2: &str,
        a_angle: f64,
    ) -> Result<Self> {
        if path1 == path2 {
            return Err(Error::config(format!(
                "pair paths must differ (both are '{path1}')"
            )));
        }
        check_angle(a_angle)?;
        let a = reduce_angle(a_angle);
        let par = linear(a);
        let perp = [-a.sin(), a.cos()];
        let mut terms = Amplitudes::new();
        for p1 in Pol::BOTH {
            for p2 in Pol::BOTH {
                let (i, j) = (p1.index(), p2.index());
                let amp = (par[i] * par[j] + perp[i] * perp[j]) * std::f64::consts::FRAC_1_SQRT_2;
                let m1 = registry.require(path1, p1, DEFAULT_TAG)?;
                let m2 = registry.require(path2, p2, DEFAULT_TAG)?;
                terms.insert(
                    OccupationVector::from_photons([m1, m2]),
                    Complex64::new(amp, 0.0),
                );
            }
        }
        Self::from_amplitudes(registry, terms)
    }

    /// Product state. The two states must occupy disjoint paths.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        self.same_registry(other)?;
        let mine = self.occupied_paths();
        if let Some(p) = other.occupied_paths().intersection(&mine).next() {
            return Err(Error::config(format!(
                "tensor product of states both occupying path '{p}'"
            )));
        }
        let mut terms = Amplitudes::new();
        for (o1, a1) in &self.terms {
            for (o2, a2) in &other.terms {
                let occ = o1
                    .disjoint_union(o2)
                    .expect("occupied paths are disjoint");
                *terms.entry(occ).or_default() += a1 * a2;
            }
        }
        Self::from_amplitudes(self.registry.clone(), terms)
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.same_registry(other)?;
        Ok(inner_amplitudes(&self.terms, &other.terms))
    }

    /// Reduced state of `keep_paths`, tracing all other modes and all tags.
    pub fn reduced_density_matrix(&self, keep_paths: &BTreeSet<String>) -> Result<DensityMatrix> {
        density::reduce(&self.registry, self.terms.iter(), keep_paths, 1.0)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.terms
    }

    pub fn into_amplitudes(self) -> Amplitudes {
        self.terms
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.terms)
    }

    pub fn n_photons(&self) -> u32 {
        self.terms.keys().next().map_or(0, OccupationVector::n_total)
    }

    /// Paths holding at least one photon in some term.
    pub fn occupied_paths(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|occ| occ.iter().map(|(m, _)| self.registry.mode(m).path.clone()))
            .collect()
    }

    pub(crate) fn same_registry(&self, other: &PureState) -> Result<()> {
        same_registry(&self.registry, &other.registry)
    }
}

pub(crate) fn same_registry(a: &Arc<ModeRegistry>, b: &Arc<ModeRegistry>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::RegistryMismatch)
    }
}

pub fn norm_sqr(terms: &Amplitudes) -> f64 {
    terms.values().map(Complex64::norm_sqr).sum()
}

pub fn inner_amplitudes(left: &Amplitudes, right: &Amplitudes) -> Complex64 {
    left.iter()
        .filter_map(|(k, a)| right.get(k).map(|b| a.conj() * b))
        .sum()
}

/// Drops amplitudes below [`PRUNE_THRESHOLD`].
pub fn prune(terms: Amplitudes) -> Amplitudes {
    terms
        .into_iter()
        .filter(|(_, a)| a.norm() >= PRUNE_THRESHOLD)
        .collect()
}

fn check_terms(registry: &ModeRegistry, terms: &Amplitudes) -> Result<()> {
    let mut n = None;
    for occ in terms.keys() {
        if let Some((m, _)) = occ.iter().find(|&(m, _)| m >= registry.len()) {
            return Err(Error::config(format!(
                "mode index {m} outside registry of {} modes",
                registry.len()
            )));
        }
        match n {
            None => n = Some(occ.n_total()),
            Some(k) if k != occ.n_total() => {
                return Err(Error::config(format!(
                    "mixed photon numbers {k} and {} in one state",
                    occ.n_total()
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("non-finite angle {theta}")))
    }
}
