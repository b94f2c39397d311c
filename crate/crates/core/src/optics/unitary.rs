use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fock::{same_registry, ModeRegistry};
use crate::{Error, Result, UNITARITY_TOLERANCE};

/// Phase convention of a two-port beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BsConvention {
    /// `[[√T, i√R], [i√R, √T]]`: reflection picks up a factor `i`.
    #[default]
    Symmetric,
    /// `[[√T, √R], [√R, −√T]]`.
    Real,
}

impl BsConvention {
    pub fn name(self) -> &'static str {
        match self {
            BsConvention::Symmetric => "symmetric",
            BsConvention::Real => "real",
        }
    }
}

/// 2×2 beam-splitter matrix acting on `(port A, port B)` amplitudes;
/// column `k` is the image of input port `k`.
pub fn bs_matrix(transmissivity: f64, convention: BsConvention) -> Result<Matrix2<Complex64>> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::config(format!(
            "transmissivity {transmissivity} outside [0, 1]"
        )));
    }
    let t = transmissivity.sqrt();
    let r = (1.0 - transmissivity).sqrt();
    let re = |x: f64| Complex64::new(x, 0.0);
    Ok(match convention {
        BsConvention::Symmetric => {
            let ir = Complex64::new(0.0, r);
            Matrix2::new(re(t), ir, ir, re(t))
        }
        BsConvention::Real => Matrix2::new(re(t), re(r), re(r), re(-t)),
    })
}

/// Rotation of the `(H, V)` Jones vector by `angle`: maps `|H⟩` to `|angle⟩`.
pub fn rotator_matrix(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Unitary on the single-photon space of a mode registry. Column `j` holds the
/// image of the creation operator of mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    registry: Arc<ModeRegistry>,
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    /// Checks shape and `U†U = I` within [`UNITARITY_TOLERANCE`].
    pub fn new(registry: Arc<ModeRegistry>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = registry.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::config(format!(
                "{}x{} matrix for a registry of {n} modes",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let u = ModeUnitary { registry, matrix };
        let err = u.unitarity_error();
        if err > UNITARITY_TOLERANCE {
            return Err(Error::numerical(format!(
                "matrix is not unitary (max |U†U - I| = {err:e})"
            )));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(registry: Arc<ModeRegistry>, matrix: DMatrix<Complex64>) -> Self {
        ModeUnitary { registry, matrix }
    }

    pub fn identity(registry: Arc<ModeRegistry>) -> Self {
        let n = registry.len();
        ModeUnitary {
            registry,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Haar-distributed random unitary (QR of a complex Ginibre matrix with
    /// the phases of `R`'s diagonal divided out).
    pub fn haar_random<R: Rng + ?Sized>(registry: Arc<ModeRegistry>, rng: &mut R) -> Self {
        let n = registry.len();
        let z = DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let qr = z.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for z in q.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        ModeUnitary::from_raw(registry, q)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary::from_raw(self.registry.clone(), self.matrix.adjoint())
    }

    /// `next · self`: first `self`, then `next`.
    pub fn then(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        same_registry(&self.registry, &next.registry)?;
        Ok(ModeUnitary::from_raw(
            self.registry.clone(),
            &next.matrix * &self.matrix,
        ))
    }

    /// Max entry of `|U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest entry-wise difference to another unitary.
    pub fn max_abs_diff(&self, other: &ModeUnitary) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Nonzero entries `(row, U[row, col])` of one column.
    pub fn column_support(&self, col: usize) -> Vec<(usize, Complex64)> {
        self.matrix
            .column(col)
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != Complex64::default())
            .map(|(i, z)| (i, *z))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn unitarity2(m: &Matrix2<Complex64>) -> f64 {
        (m.adjoint() * m - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn bs_matrix_cases() {
        let id = bs_matrix(1.0, BsConvention::Symmetric).unwrap();
        assert_eq!(id, Matrix2::identity());

        let sym = bs_matrix(0.5, BsConvention::Symmetric).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let ih = Complex64::new(0.0, FRAC_1_SQRT_2);
        assert!((sym - Matrix2::new(h, ih, ih, h)).norm() < 1e-16);
        assert!(unitarity2(&sym) < 1e-15);

        let real = bs_matrix(0.5, BsConvention::Real).unwrap();
        assert!((real - Matrix2::new(h, h, h, -h)).norm() < 1e-16);
        assert!(unitarity2(&real) < 1e-15);

        for t in [0.0, 0.1, 0.37, 0.9] {
            for conv in [BsConvention::Symmetric, BsConvention::Real] {
                assert!(unitarity2(&bs_matrix(t, conv).unwrap()) < 1e-15);
            }
        }
        assert!(bs_matrix(1.5, BsConvention::Real).is_err());
        assert!(bs_matrix(-0.1, BsConvention::Symmetric).is_err());
        assert!(bs_matrix(f64::NAN, BsConvention::Symmetric).is_err());
    }

    #[test]
    fn rotator_group_law() {
        assert_eq!(rotator_matrix(0.0), Matrix2::identity());
        let quarter = rotator_matrix(FRAC_PI_2);
        // H -> V, V -> -H
        assert!((quarter[(1, 0)] - 1.0).abs() < 1e-16);
        assert!((quarter[(0, 1)] + 1.0).abs() < 1e-16);
        let (x, y) = (0.3, -1.1);
        let diff = rotator_matrix(x) * rotator_matrix(y) - rotator_matrix(x + y);
        assert!(diff.norm() < 1e-15);
    }

    #[test]
    fn haar_random_is_unitary() {
        let reg = Arc::new(ModeRegistry::new(["a", "b", "c", "d"], &[0]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = ModeUnitary::haar_random(reg.clone(), &mut rng);
            assert!(u.unitarity_error() < 1e-12);
            assert!(ModeUnitary::new(reg.clone(), u.matrix().clone()).is_ok());
        }
        let bad = DMatrix::from_element(8, 8, Complex64::new(1.0, 0.0));
        assert!(matches!(ModeUnitary::new(reg.clone(), bad), Err(Error::Numerical(_))));
        let wrong = DMatrix::identity(3, 3);
        assert!(matches!(ModeUnitary::new(reg, wrong), Err(Error::Config(_))));
    }
}
