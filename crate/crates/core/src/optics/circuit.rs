use std::collections::BTreeSet;
use std::sync::Arc;

use super::element::Element;
use super::unitary::ModeUnitary;
use crate::fock::ModeRegistry;
use crate::{Error, Result, UNITARITY_TOLERANCE};

/// Ordered list of elements over a registry, fed by declared source paths.
///
/// Paths flow forward: an element may only read paths that are sources or
/// were produced by an earlier element and have not been consumed since.
/// In-place elements (rotators, phase shifters, in-place couplers) read and
/// write the same paths without consuming them.
#[derive(Debug, Clone)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    elements: Vec<Element>,
    sources: Vec<String>,
}

impl Circuit {
    pub fn new<I, S>(registry: Arc<ModeRegistry>, sources: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for s in sources {
            let s = s.into();
            registry.require_path(&s)?;
            if !seen.insert(s.clone()) {
                return Err(Error::config(format!("source path '{s}' declared twice")));
            }
            list.push(s);
        }
        Ok(Circuit {
            registry,
            elements: Vec::new(),
            sources: list,
        })
    }

    pub fn push(&mut self, element: Element) -> &mut Self {
        self.elements.push(element);
        self
    }

    pub fn with(mut self, element: Element) -> Self {
        self.elements.push(element);
        self
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Checks the directed-acyclic path flow.
    pub fn validate(&self) -> Result<()> {
        let mut live: BTreeSet<&str> = self.sources.iter().map(String::as_str).collect();
        let mut ever = live.clone();
        for (k, e) in self.elements.iter().enumerate() {
            let fail = |why: String| Error::config(format!("element #{k} ({e}): {why}"));
            for p in e.input_paths().into_iter().chain(e.output_paths()) {
                self.registry.require_path(p).map_err(|err| fail(err.to_string()))?;
            }
            for p in e.input_paths() {
                if !live.contains(p) {
                    let why = if ever.contains(p) {
                        format!("path '{p}' was already consumed")
                    } else {
                        format!("path '{p}' is neither a source nor an earlier output")
                    };
                    return Err(fail(why));
                }
            }
            if e.is_in_place() {
                continue;
            }
            for p in e.input_paths() {
                live.remove(p);
            }
            for p in e.output_paths() {
                if !ever.insert(p) {
                    return Err(fail(format!("output path '{p}' already exists upstream")));
                }
                live.insert(p);
            }
        }
        Ok(())
    }

    /// Validates the flow and returns `M_k ⋯ M_2 · M_1`.
    pub fn compile(&self) -> Result<ModeUnitary> {
        self.validate()?;
        let mut total = ModeUnitary::identity(self.registry.clone());
        for (k, e) in self.elements.iter().enumerate() {
            let u = e
                .unitary(&self.registry)
                .map_err(|err| match err {
                    Error::Config(msg) => Error::config(format!("element #{k}: {msg}")),
                    other => other,
                })?;
            total = total.then(&u)?;
        }
        let err = total.unitarity_error();
        if err > UNITARITY_TOLERANCE {
            return Err(Error::numerical(format!(
                "compiled circuit is not unitary (max |U†U - I| = {err:e})"
            )));
        }
        Ok(total)
    }
}
