use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fock::{reduce_angle, ModeRegistry, OccupationVector, Pol};
use crate::{Error, Result};

/// What a detector on one path must report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRequirement {
    pub count: u32,
    /// Polarizer axis in radians (reduced mod π). When set, all `count`
    /// photons must pass an ideal polarizer at this axis.
    pub filter: Option<f64>,
}

/// A post-selection condition: required counts on detected paths, plus the
/// set of paths whose state is kept. Paths in neither set are marginalized.
/// Tags are never observable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionPattern {
    detect: BTreeMap<String, PathRequirement>,
    undetected: BTreeSet<String>,
}

impl DetectionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// One photon on each of `paths`, keeping `undetected`.
    pub fn coincidence(paths: &[&str], undetected: &[&str]) -> Self {
        let mut p = Self::new();
        for path in paths {
            p = p.detect(path, 1);
        }
        for path in undetected {
            p = p.undetected(path);
        }
        p
    }

    pub fn detect(mut self, path: &str, count: u32) -> Self {
        self.detect
            .insert(path.to_string(), PathRequirement { count, filter: None });
        self
    }

    pub fn detect_filtered(mut self, path: &str, count: u32, axis: f64) -> Self {
        self.detect.insert(
            path.to_string(),
            PathRequirement {
                count,
                filter: Some(reduce_angle(axis)),
            },
        );
        self
    }

    pub fn undetected(mut self, path: &str) -> Self {
        self.undetected.insert(path.to_string());
        self
    }

    pub fn requirements(&self) -> &BTreeMap<String, PathRequirement> {
        &self.detect
    }

    pub fn undetected_paths(&self) -> &BTreeSet<String> {
        &self.undetected
    }

    pub(crate) fn filters(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.detect
            .iter()
            .filter_map(|(p, r)| r.filter.map(|axis| (p.as_str(), axis)))
    }

    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        if let Some(p) = self.detect.keys().find(|p| self.undetected.contains(*p)) {
            return Err(Error::config(format!(
                "path '{p}' is both detected and undetected"
            )));
        }
        for p in self.detect.keys().chain(&self.undetected) {
            registry.require_path(p)?;
        }
        if let Some((p, _)) = self.filters().find(|(_, a)| !a.is_finite()) {
            return Err(Error::config(format!("non-finite filter axis on '{p}'")));
        }
        Ok(())
    }

    /// Whether a basis state (after filtered paths were rotated so that each
    /// filter axis lies along `H`) satisfies every requirement.
    pub(crate) fn matches(&self, occ: &OccupationVector, registry: &ModeRegistry) -> bool {
        let mut along: BTreeMap<&str, u32> = BTreeMap::new();
        let mut across: BTreeMap<&str, u32> = BTreeMap::new();
        for (m, n) in occ.iter() {
            let mode = registry.mode(m);
            if let Some((path, _)) = self.detect.get_key_value(&mode.path) {
                let filtered = self.detect[path].filter.is_some();
                if filtered && mode.pol == Pol::V {
                    *across.entry(path).or_default() += n;
                } else {
                    *along.entry(path).or_default() += n;
                }
            }
        }
        self.detect.iter().all(|(p, req)| {
            along.get(p.as_str()).copied().unwrap_or(0) == req.count
                && across.get(p.as_str()).copied().unwrap_or(0) == 0
        })
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (p, r)) in self.detect.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}@{p}", r.count)?;
            if let Some(axis) = r.filter {
                write!(f, "[{:.6}deg]", axis.to_degrees())?;
            }
        }
        f.write_str("}")?;
        if !self.undetected.is_empty() {
            let u: Vec<&str> = self.undetected.iter().map(String::as_str).collect();
            write!(f, " keep {}", u.join(","))?;
        }
        Ok(())
    }
}

/// Every assignment of photon counts to `paths` with total at most
/// `max_photons`, each keeping `undetected`.
pub fn count_patterns(paths: &[&str], max_photons: u32, undetected: &[&str]) -> Vec<DetectionPattern> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; paths.len()];
    fn rec(
        k: usize,
        left: u32,
        paths: &[&str],
        counts: &mut Vec<u32>,
        undetected: &[&str],
        out: &mut Vec<DetectionPattern>,
    ) {
        if k == paths.len() {
            let mut p = DetectionPattern::new();
            for (path, &n) in paths.iter().zip(counts.iter()) {
                p = p.detect(path, n);
            }
            for u in undetected {
                p = p.undetected(u);
            }
            out.push(p);
            return;
        }
        for n in 0..=left {
            counts[k] = n;
            rec(k + 1, left - n, paths, counts, undetected, out);
        }
        counts[k] = 0;
    }
    rec(0, max_photons, paths, &mut counts, undetected, &mut out);
    out
}
