use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// Lab-frame linear polarization component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pol::H => f.write_str("H"),
            Pol::V => f.write_str("V"),
        }
    }
}

/// Distinguishability label. Opaque: only its equality matters.
pub type Tag = u32;

pub const DEFAULT_TAG: Tag = 0;

/// One bosonic mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub path: String,
    pub pol: Pol,
    pub tag: Tag,
}

impl Mode {
    pub fn new(path: impl Into<String>, pol: Pol, tag: Tag) -> Self {
        Mode {
            path: path.into(),
            pol,
            tag,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}#{}", self.path, self.pol, self.tag)
    }
}

/// Ordered set of modes; the position of a mode is its basis index.
#[derive(Debug, Clone)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
    paths: Vec<String>,
    tags: Vec<Tag>,
}

impl PartialEq for ModeRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

impl ModeRegistry {
    /// Full product registry: for each path (in the given order), for each
    /// tag, the `H` then `V` mode.
    pub fn new<P, S>(paths: P, tags: &[Tag]) -> Result<Self>
    where
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if tags.is_empty() {
            return Err(Error::config("mode registry needs at least one tag"));
        }
        let mut modes = Vec::new();
        for path in paths {
            let path = path.into();
            for &tag in tags {
                for pol in Pol::BOTH {
                    modes.push(Mode::new(path.clone(), pol, tag));
                }
            }
        }
        Self::from_modes(modes)
    }

    /// Registry over an explicit mode list, kept in the given order.
    pub fn from_modes(modes: Vec<Mode>) -> Result<Self> {
        let mut index = HashMap::with_capacity(modes.len());
        let mut paths: Vec<String> = Vec::new();
        let mut tags: Vec<Tag> = Vec::new();
        for (i, mode) in modes.iter().enumerate() {
            if mode.path.is_empty() {
                return Err(Error::config("empty path name"));
            }
            if index.insert(mode.clone(), i).is_some() {
                return Err(Error::config(format!("duplicate mode {mode}")));
            }
            if !paths.contains(&mode.path) {
                paths.push(mode.path.clone());
            }
            if !tags.contains(&mode.tag) {
                tags.push(mode.tag);
            }
        }
        Ok(ModeRegistry {
            modes,
            index,
            paths,
            tags,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> &Mode {
        &self.modes[index]
    }

    /// Paths in order of first appearance.
    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn has_path(&self, path: &str) -> bool {
        self.paths.iter().any(|p| p == path)
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn index_of(&self, path: &str, pol: Pol, tag: Tag) -> Option<usize> {
        self.index.get(&Mode::new(path, pol, tag)).copied()
    }

    /// Like [`index_of`](Self::index_of) but a missing mode is a config error.
    pub fn require(&self, path: &str, pol: Pol, tag: Tag) -> Result<usize> {
        self.index
            .get(&Mode::new(path, pol, tag))
            .copied()
            .ok_or_else(|| Error::config(format!("unknown mode {path}:{pol}#{tag}")))
    }

    pub fn require_path(&self, path: &str) -> Result<()> {
        if self.has_path(path) {
            Ok(())
        } else {
            Err(Error::config(format!("unknown path '{path}'")))
        }
    }

    /// Indices of every mode on `path`.
    pub fn indices_on_path<'a>(&'a self, path: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.modes
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.path == path)
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_is_path_tag_pol() {
        let reg = ModeRegistry::new(["l", "q"], &[0, 1]).unwrap();
        let labels: Vec<String> = reg.modes().iter().map(|m| m.to_string()).collect();
        assert_eq!(
            labels,
            [
                "l:H#0", "l:V#0", "l:H#1", "l:V#1", "q:H#0", "q:V#0", "q:H#1", "q:V#1"
            ]
        );
        assert_eq!(reg.require("q", Pol::V, 1).unwrap(), 7);
        assert_eq!(reg.index_of("q", Pol::V, 1), Some(7));
        assert!(reg.require("x", Pol::H, 0).is_err());
        assert!(reg.require("l", Pol::H, 2).is_err());
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(ModeRegistry::new(["l", "l"], &[0]).is_err());
        assert!(ModeRegistry::new(["l"], &[]).is_err());
        assert!(ModeRegistry::new([""], &[0]).is_err());
    }
}
