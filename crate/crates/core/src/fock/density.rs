use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::mode::{ModeRegistry, Pol, Tag};
use super::occupation::{BlindOccupation, OccupationVector, PathPol};
use super::polarization::PolarizationState;
use crate::{Error, Result, HERMITICITY_TOLERANCE, NORM_TOLERANCE};

/// Density matrix over tag-blind occupations of a subset of paths.
///
/// The basis holds only the occupations that carry weight, in canonical
/// order; use [`entry`](Self::entry) or [`qubit`](Self::qubit) to address
/// components by label rather than index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Vec<BlindOccupation>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace.
    pub fn new(basis: Vec<BlindOccupation>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::config(format!(
                "{}x{} matrix for a basis of {} states",
                matrix.nrows(),
                matrix.ncols(),
                basis.len()
            )));
        }
        let rho = DensityMatrix { basis, matrix };
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOLERANCE {
            return Err(Error::numerical(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return Err(Error::numerical(format!("density matrix trace {tr} is not 1")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a single photon on `path`.
    pub fn pure_polarization(path: &str, state: &PolarizationState) -> Self {
        let basis = qubit_basis(path).to_vec();
        let c = state.components();
        let matrix = DMatrix::from_fn(2, 2, |i, j| c[i] * c[j].conj());
        DensityMatrix { basis, matrix }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BlindOccupation] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// True when the kept paths never hold a photon: the result is the
    /// trivial 1×1 matrix on the vacuum.
    pub fn is_zero_photon(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].is_vacuum()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diagonal().iter().sum()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ.
        self.matrix.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn entry(&self, row: &BlindOccupation, col: &BlindOccupation) -> Complex64 {
        match (self.position(row), self.position(col)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::default(),
        }
    }

    fn position(&self, occ: &BlindOccupation) -> Option<usize> {
        self.basis.binary_search(occ).ok()
    }

    /// `Σ w_k ρ_k` over the union of the bases. The result is not required to
    /// have unit trace.
    pub fn weighted_sum(parts: &[(f64, &DensityMatrix)]) -> (Vec<BlindOccupation>, DMatrix<Complex64>) {
        let basis: Vec<BlindOccupation> = parts
            .iter()
            .flat_map(|(_, rho)| rho.basis.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = basis.len();
        let mut matrix = DMatrix::zeros(n, n);
        for (w, rho) in parts {
            let map: Vec<usize> = rho
                .basis
                .iter()
                .map(|b| basis.binary_search(b).expect("basis is a union"))
                .collect();
            for (i, &bi) in map.iter().enumerate() {
                for (j, &bj) in map.iter().enumerate() {
                    matrix[(bi, bj)] += rho.matrix[(i, j)] * *w;
                }
            }
        }
        (basis, matrix)
    }

    /// Largest entry-wise difference, matching entries by basis label.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let (basis, diff) = Self::weighted_sum(&[(1.0, self), (-1.0, other)]);
        debug_assert_eq!(diff.nrows(), basis.len());
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The 2×2 polarization matrix of a single photon on `path`, in the lab
    /// `{H, V}` order. Components missing from the basis are zero.
    pub fn qubit(&self, path: &str) -> Result<Matrix2<Complex64>> {
        if let Some(b) = self.basis.iter().find(|b| !is_single_photon_on(b, path)) {
            return Err(Error::analysis(format!(
                "not a single-photon polarization state on '{path}' (basis contains {b})"
            )));
        }
        let [h, v] = qubit_basis(path);
        Ok(Matrix2::new(
            self.entry(&h, &h),
            self.entry(&h, &v),
            self.entry(&v, &h),
            self.entry(&v, &v),
        ))
    }

    /// Like [`qubit`](Self::qubit), inferring the path from the basis.
    pub fn single_qubit(&self) -> Result<(String, Matrix2<Complex64>)> {
        let path = self
            .basis
            .first()
            .and_then(|b| b.iter().next())
            .map(|(pp, _)| pp.path.clone())
            .ok_or_else(|| Error::analysis("empty or vacuum density matrix"))?;
        let m = self.qubit(&path)?;
        Ok((path, m))
    }
}

fn qubit_basis(path: &str) -> [BlindOccupation; 2] {
    Pol::BOTH.map(|pol| {
        BlindOccupation::from_counts([(
            PathPol {
                path: path.to_string(),
                pol,
            },
            1,
        )])
    })
}

fn is_single_photon_on(b: &BlindOccupation, path: &str) -> bool {
    b.n_total() == 1 && b.path_count(path) == 1
}

/// What is traced out for one term: every unkept mode occupation, plus the
/// tag multiset of the kept photons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Environment {
    traced: OccupationVector,
    kept_tags: Vec<(Tag, u32)>,
}

/// Partial trace of the (possibly unnormalized) amplitudes `terms` onto the
/// tag-blind occupations of `keep_paths`, divided by `weight`.
///
/// Tags inside the kept paths are traced too. That is only well defined when
/// the kept photons either share one tag or sit alone; an input where two
/// different basis states collapse onto the same (kept, traced) pair is
/// rejected.
pub(crate) fn reduce<'a, I>(
    registry: &ModeRegistry,
    terms: I,
    keep_paths: &BTreeSet<String>,
    weight: f64,
) -> Result<DensityMatrix>
where
    I: IntoIterator<Item = (&'a OccupationVector, &'a Complex64)>,
{
    if keep_paths.is_empty() {
        return Err(Error::config("no paths to keep"));
    }
    for p in keep_paths {
        registry.require_path(p)?;
    }
    let kept: Vec<bool> = registry
        .modes()
        .iter()
        .map(|m| keep_paths.contains(&m.path))
        .collect();

    let mut blocks: BTreeMap<Environment, Vec<(BlindOccupation, Complex64)>> = BTreeMap::new();
    let mut seen: HashMap<(BlindOccupation, Environment), &OccupationVector> = HashMap::new();
    for (occ, &amp) in terms {
        let sys = BlindOccupation::project(occ, registry, |m| kept[m]);
        let env = Environment {
            traced: OccupationVector::from_counts(occ.iter().filter(|&(m, _)| !kept[m])),
            kept_tags: tag_counts(occ.iter().filter(|&(m, _)| kept[m]), registry),
        };
        if let Some(prev) = seen.insert((sys.clone(), env.clone()), occ) {
            if prev != occ {
                return Err(Error::config(format!(
                    "tag-blind reduction is ambiguous: {} and {} coincide",
                    prev.display(registry),
                    occ.display(registry)
                )));
            }
        }
        blocks.entry(env).or_default().push((sys, amp));
    }

    let basis: Vec<BlindOccupation> = blocks
        .values()
        .flatten()
        .map(|(sys, _)| sys.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if basis.is_empty() {
        return Err(Error::config("cannot reduce an empty state"));
    }
    let n = basis.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for block in blocks.values() {
        let idx: Vec<(usize, Complex64)> = block
            .iter()
            .map(|(sys, a)| (basis.binary_search(sys).expect("basis covers block"), *a))
            .collect();
        for &(i, ai) in &idx {
            for &(j, aj) in &idx {
                if i <= j {
                    matrix[(i, j)] += ai * aj.conj();
                }
            }
        }
    }
    for i in 0..n {
        matrix[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            matrix[(j, i)] = matrix[(i, j)].conj();
        }
    }
    matrix /= Complex64::new(weight, 0.0);
    DensityMatrix::new(basis, matrix)
}

fn tag_counts<I: Iterator<Item = (usize, u32)>>(modes: I, registry: &ModeRegistry) -> Vec<(Tag, u32)> {
    let mut acc: BTreeMap<Tag, u32> = BTreeMap::new();
    for (m, n) in modes {
        *acc.entry(registry.mode(m).tag).or_default() += n;
    }
    acc.into_iter().collect()
}
