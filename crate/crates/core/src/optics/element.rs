use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::unitary::{bs_matrix, rotator_matrix, BsConvention, ModeUnitary};
use crate::fock::{linear, reduce_angle, ModeRegistry, Pol};
use crate::{Error, Result};

/// An ideal lossless optical element. Every variant acts identically on each
/// tag sub-block; beam splitters also act identically on both polarizations.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Two-port coupler mixing `inputs` into `outputs`. With `outputs ==
    /// inputs` the element acts in place.
    BeamSplitter {
        inputs: (String, String),
        outputs: (String, String),
        transmissivity: f64,
        convention: BsConvention,
    },
    /// Two-channel polarizer: the component along `axis` (radians) goes to
    /// `transmit`, the orthogonal one to `reflect`, each keeping its
    /// polarization.
    PolarizingBeamSplitter {
        input: String,
        axis: f64,
        transmit: String,
        reflect: String,
    },
    PolarizationRotator { path: String, angle: f64 },
    PhaseShifter { path: String, pol: Pol, phase: f64 },
}

impl Element {
    pub fn beam_splitter(
        inputs: (&str, &str),
        outputs: (&str, &str),
        transmissivity: f64,
        convention: BsConvention,
    ) -> Self {
        Element::BeamSplitter {
            inputs: (inputs.0.into(), inputs.1.into()),
            outputs: (outputs.0.into(), outputs.1.into()),
            transmissivity,
            convention,
        }
    }

    pub fn pbs(input: &str, axis: f64, transmit: &str, reflect: &str) -> Self {
        Element::PolarizingBeamSplitter {
            input: input.into(),
            axis,
            transmit: transmit.into(),
            reflect: reflect.into(),
        }
    }

    pub fn rotator(path: &str, angle: f64) -> Self {
        Element::PolarizationRotator {
            path: path.into(),
            angle,
        }
    }

    pub fn phase_shifter(path: &str, pol: Pol, phase: f64) -> Self {
        Element::PhaseShifter {
            path: path.into(),
            pol,
            phase,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Element::BeamSplitter { .. } => "beam_splitter",
            Element::PolarizingBeamSplitter { .. } => "pbs",
            Element::PolarizationRotator { .. } => "rotator",
            Element::PhaseShifter { .. } => "phase_shifter",
        }
    }

    pub fn input_paths(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { inputs, .. } => vec![&inputs.0, &inputs.1],
            Element::PolarizingBeamSplitter { input, .. } => vec![input],
            Element::PolarizationRotator { path, .. } | Element::PhaseShifter { path, .. } => {
                vec![path]
            }
        }
    }

    pub fn output_paths(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { outputs, .. } => vec![&outputs.0, &outputs.1],
            Element::PolarizingBeamSplitter {
                transmit, reflect, ..
            } => vec![transmit, reflect],
            Element::PolarizationRotator { path, .. } | Element::PhaseShifter { path, .. } => {
                vec![path]
            }
        }
    }

    /// True when the outputs are the inputs (no new paths are created).
    pub fn is_in_place(&self) -> bool {
        self.input_paths() == self.output_paths()
    }

    /// The element's unitary on the full registry (identity elsewhere).
    pub fn unitary(&self, registry: &Arc<ModeRegistry>) -> Result<ModeUnitary> {
        for p in self.input_paths().into_iter().chain(self.output_paths()) {
            registry.require_path(p)?;
        }
        let n = registry.len();
        let mut m = DMatrix::<Complex64>::identity(n, n);
        match self {
            Element::BeamSplitter {
                inputs,
                outputs,
                transmissivity,
                convention,
            } => {
                let bs = bs_matrix(*transmissivity, *convention)?;
                let in_place = inputs == outputs;
                let ports = [&inputs.0, &inputs.1, &outputs.0, &outputs.1];
                if !in_place && !all_distinct(&ports) {
                    return Err(Error::config(format!(
                        "{self}: ports must be four distinct paths or act in place"
                    )));
                }
                if inputs.0 == inputs.1 {
                    return Err(Error::config(format!("{self}: input ports coincide")));
                }
                for &tag in registry.tags() {
                    for pol in Pol::BOTH {
                        let [a, b, c, d] =
                            ports.map(|p| registry.require(p, pol, tag)).map(|r| r.ok());
                        let (Some(a), Some(b), Some(c), Some(d)) = (a, b, c, d) else {
                            return Err(missing_block(self, pol, tag));
                        };
                        for i in [a, b, c, d] {
                            m[(i, i)] = Complex64::default();
                        }
                        m[(c, a)] = bs[(0, 0)];
                        m[(d, a)] = bs[(1, 0)];
                        m[(c, b)] = bs[(0, 1)];
                        m[(d, b)] = bs[(1, 1)];
                        if !in_place {
                            // Reverse ports carry the adjoint block, so the
                            // 4×4 block [[0, B†], [B, 0]] is unitary.
                            m[(a, c)] = bs[(0, 0)].conj();
                            m[(b, c)] = bs[(0, 1)].conj();
                            m[(a, d)] = bs[(1, 0)].conj();
                            m[(b, d)] = bs[(1, 1)].conj();
                        }
                    }
                }
            }
            Element::PolarizingBeamSplitter {
                input,
                axis,
                transmit,
                reflect,
            } => {
                if !all_distinct(&[input, transmit, reflect]) {
                    return Err(Error::config(format!("{self}: path collision")));
                }
                if !axis.is_finite() {
                    return Err(Error::config(format!("{self}: non-finite axis")));
                }
                let axis = reduce_angle(*axis);
                let par = linear(axis);
                let perp = [-axis.sin(), axis.cos()];
                for &tag in registry.tags() {
                    let idx = |p: &str| -> Result<[usize; 2]> {
                        Ok([
                            registry.require(p, Pol::H, tag)?,
                            registry.require(p, Pol::V, tag)?,
                        ])
                    };
                    let (Ok(i), Ok(t), Ok(r)) = (idx(input), idx(transmit), idx(reflect)) else {
                        return Err(missing_block(self, Pol::H, tag));
                    };
                    for k in i.iter().chain(&t).chain(&r) {
                        m[(*k, *k)] = Complex64::default();
                    }
                    // Involution on the six-mode block: in∥ ↔ t∥, in⊥ ↔ r⊥,
                    // and t⊥ ↔ r∥ on the reverse ports.
                    add_swap(&mut m, i, par, t, par);
                    add_swap(&mut m, i, perp, r, perp);
                    add_swap(&mut m, t, perp, r, par);
                }
            }
            Element::PolarizationRotator { path, angle } => {
                if !angle.is_finite() {
                    return Err(Error::config(format!("{self}: non-finite angle")));
                }
                let rot = rotator_matrix(*angle);
                for &tag in registry.tags() {
                    let (Ok(h), Ok(v)) = (
                        registry.require(path, Pol::H, tag),
                        registry.require(path, Pol::V, tag),
                    ) else {
                        return Err(missing_block(self, Pol::H, tag));
                    };
                    let ix = [h, v];
                    for (r, &row) in ix.iter().enumerate() {
                        for (c, &col) in ix.iter().enumerate() {
                            m[(row, col)] = Complex64::new(rot[(r, c)], 0.0);
                        }
                    }
                }
            }
            Element::PhaseShifter { path, pol, phase } => {
                if !phase.is_finite() {
                    return Err(Error::config(format!("{self}: non-finite phase")));
                }
                for &tag in registry.tags() {
                    let k = registry
                        .require(path, *pol, tag)
                        .map_err(|_| missing_block(self, *pol, tag))?;
                    m[(k, k)] = Complex64::from_polar(1.0, *phase);
                }
            }
        }
        Ok(ModeUnitary::from_raw(registry.clone(), m))
    }
}

/// Adds `|x⟩⟨y| + |y⟩⟨x|` where `x = Σ_p vx[p] e_{xi[p]}` and likewise `y`.
fn add_swap(m: &mut DMatrix<Complex64>, xi: [usize; 2], vx: [f64; 2], yi: [usize; 2], vy: [f64; 2]) {
    for p in 0..2 {
        for q in 0..2 {
            let w = Complex64::new(vx[p] * vy[q], 0.0);
            m[(xi[p], yi[q])] += w;
            m[(yi[q], xi[p])] += w;
        }
    }
}

fn all_distinct(paths: &[&String]) -> bool {
    paths
        .iter()
        .enumerate()
        .all(|(i, p)| paths[i + 1..].iter().all(|q| p != q))
}

fn missing_block(e: &Element, pol: Pol, tag: u32) -> Error {
    Error::config(format!("{e}: registry lacks the {pol}#{tag} modes it acts on"))
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::BeamSplitter {
                inputs,
                outputs,
                transmissivity,
                convention,
            } => write!(
                f,
                "beam splitter ({},{})->({},{}) T={transmissivity} {}",
                inputs.0,
                inputs.1,
                outputs.0,
                outputs.1,
                convention.name()
            ),
            Element::PolarizingBeamSplitter {
                input,
                axis,
                transmit,
                reflect,
            } => write!(
                f,
                "pbs {input}->({transmit},{reflect}) axis={:.6}deg",
                axis.to_degrees()
            ),
            Element::PolarizationRotator { path, angle } => {
                write!(f, "rotator {path} angle={:.6}deg", angle.to_degrees())
            }
            Element::PhaseShifter { path, pol, phase } => {
                write!(f, "phase shifter {path}:{pol} phase={phase}")
            }
        }
    }
}

/// Polarizing beam splitter on the full registry.
pub fn pbs_unitary(
    axis: f64,
    input: &str,
    transmit: &str,
    reflect: &str,
    registry: &Arc<ModeRegistry>,
) -> Result<ModeUnitary> {
    Element::pbs(input, axis, transmit, reflect).unitary(registry)
}
