use std::fmt;

use super::mode::{ModeRegistry, Pol};

/// Sparse photon counts per mode index, sorted by index. Zero counts are never
/// stored, so equal occupations compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector {
    counts: Vec<(usize, u32)>,
}

impl OccupationVector {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds from `(mode, count)` pairs; repeated modes accumulate.
    pub fn from_counts<I: IntoIterator<Item = (usize, u32)>>(counts: I) -> Self {
        let mut v: Vec<(usize, u32)> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        v.sort_unstable_by_key(|&(m, _)| m);
        let mut merged: Vec<(usize, u32)> = Vec::with_capacity(v.len());
        for (m, n) in v {
            match merged.last_mut() {
                Some((last, c)) if *last == m => *c += n,
                _ => merged.push((m, n)),
            }
        }
        OccupationVector { counts: merged }
    }

    /// Builds from a multiset of mode indices, one entry per photon.
    pub fn from_photons<I: IntoIterator<Item = usize>>(modes: I) -> Self {
        Self::from_counts(modes.into_iter().map(|m| (m, 1)))
    }

    pub fn count(&self, mode: usize) -> u32 {
        self.counts
            .binary_search_by_key(&mode, |&(m, _)| m)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn n_total(&self) -> u32 {
        self.counts.iter().map(|&(_, n)| n).sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(mode, count)` pairs with `count ≥ 1`, by ascending mode index.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().copied()
    }

    /// One mode index per photon, ascending.
    pub fn photons(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_total() as usize);
        for &(m, n) in &self.counts {
            out.extend(std::iter::repeat_n(m, n as usize));
        }
        out
    }

    /// Union of two occupations that share no mode.
    pub fn disjoint_union(&self, other: &Self) -> Option<Self> {
        if self.counts.iter().any(|&(m, _)| other.count(m) > 0) {
            return None;
        }
        Some(Self::from_counts(self.iter().chain(other.iter())))
    }

    /// `∏ n_i!` over all modes.
    pub fn factorial_product(&self) -> f64 {
        self.counts.iter().map(|&(_, n)| factorial(n)).product()
    }

    pub fn display<'a>(&'a self, registry: &'a ModeRegistry) -> impl fmt::Display + 'a {
        OccupationDisplay {
            occ: self,
            registry,
        }
    }
}

struct OccupationDisplay<'a> {
    occ: &'a OccupationVector,
    registry: &'a ModeRegistry,
}

impl fmt::Display for OccupationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occ.is_vacuum() {
            return f.write_str("vac");
        }
        for (k, (m, n)) in self.occ.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.registry.mode(m))?;
            if n > 1 {
                write!(f, "*{n}")?;
            }
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A `(path, polarization)` pair: a mode with its tag forgotten.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathPol {
    pub path: String,
    pub pol: Pol,
}

/// Photon counts per `(path, polarization)`, summed over tags. This is what
/// a polarization-resolving, tag-blind detector bank can observe.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlindOccupation {
    counts: Vec<(PathPol, u32)>,
}

impl BlindOccupation {
    pub fn from_counts<I: IntoIterator<Item = (PathPol, u32)>>(counts: I) -> Self {
        let mut v: Vec<(PathPol, u32)> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PathPol, u32)> = Vec::with_capacity(v.len());
        for (k, n) in v {
            match merged.last_mut() {
                Some((last, c)) if *last == k => *c += n,
                _ => merged.push((k, n)),
            }
        }
        BlindOccupation { counts: merged }
    }

    /// Forgets the tags of the modes selected by `keep`.
    pub fn project<F>(occ: &OccupationVector, registry: &ModeRegistry, keep: F) -> Self
    where
        F: Fn(usize) -> bool,
    {
        Self::from_counts(occ.iter().filter(|&(m, _)| keep(m)).map(|(m, n)| {
            let mode = registry.mode(m);
            (
                PathPol {
                    path: mode.path.clone(),
                    pol: mode.pol,
                },
                n,
            )
        }))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PathPol, u32)> + '_ {
        self.counts.iter().map(|(k, n)| (k, *n))
    }

    pub fn count(&self, path: &str, pol: Pol) -> u32 {
        self.counts
            .iter()
            .find(|(k, _)| k.path == path && k.pol == pol)
            .map_or(0, |(_, n)| *n)
    }

    /// Photons on `path`, both polarizations.
    pub fn path_count(&self, path: &str) -> u32 {
        self.counts
            .iter()
            .filter(|(k, _)| k.path == path)
            .map(|(_, n)| *n)
            .sum()
    }

    pub fn n_total(&self) -> u32 {
        self.counts.iter().map(|(_, n)| *n).sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.counts.is_empty()
    }
}

impl fmt::Display for BlindOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("vac");
        }
        for (k, (pp, n)) in self.counts.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", pp.path, pp.pol)?;
            if *n > 1 {
                write!(f, "*{n}")?;
            }
        }
        Ok(())
    }
}
