use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_DIM: usize = 10;

/// Largest matrix accepted by [`permanent_naive`].
pub const MAX_NAIVE_DIM: usize = 8;

/// Exact permanent via Ryser's inclusion–exclusion formula.
pub fn permanent(m: &DMatrix<Complex64>) -> Result<Complex64> {
    check_square(m, MAX_PERMANENT_DIM)?;
    Ok(ryser(m))
}

/// Exact permanent by summing over all `n!` permutations.
pub fn permanent_naive(m: &DMatrix<Complex64>) -> Result<Complex64> {
    check_square(m, MAX_NAIVE_DIM)?;
    let n = m.nrows();
    let mut used = vec![false; n];
    Ok(naive_rec(m, 0, &mut used))
}

fn check_square(m: &DMatrix<Complex64>, max: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::config(format!(
            "permanent of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > max {
        return Err(Error::config(format!(
            "permanent of a {0}x{0} matrix exceeds the {max}x{max} limit",
            m.nrows()
        )));
    }
    Ok(())
}

fn naive_rec(m: &DMatrix<Complex64>, row: usize, used: &mut [bool]) -> Complex64 {
    let n = m.nrows();
    if row == n {
        return Complex64::new(1.0, 0.0);
    }
    let mut acc = Complex64::default();
    for col in 0..n {
        if used[col] {
            continue;
        }
        used[col] = true;
        acc += m[(row, col)] * naive_rec(m, row + 1, used);
        used[col] = false;
    }
    acc
}

/// `per(A) = (−1)^n Σ_{S ⊆ cols} (−1)^{|S|} ∏_i Σ_{j∈S} a_ij`, walking the
/// subsets in Gray-code order so each step adds or removes one column.
fn ryser(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut row_sums = vec![Complex64::default(); n];
    let mut total = Complex64::default();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += m[(i, col)];
            } else {
                *s -= m[(i, col)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_cases() {
        let one = DMatrix::from_row_slice(1, 1, &[c(2.5, -1.0)]);
        assert_eq!(permanent(&one).unwrap(), c(2.5, -1.0));
        assert_eq!(permanent_naive(&one).unwrap(), c(2.5, -1.0));

        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(0.7, 0.0), c(0.0, -1.5));
        let two = DMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        let expected = a * d + b * cc;
        assert!((permanent(&two).unwrap() - expected).norm() < 1e-15);
        assert!((permanent_naive(&two).unwrap() - expected).norm() < 1e-15);

        let ones = DMatrix::from_element(3, 3, c(1.0, 0.0));
        assert!((permanent(&ones).unwrap() - c(6.0, 0.0)).norm() < 1e-14);
        assert_eq!(permanent_naive(&ones).unwrap(), c(6.0, 0.0));

        let empty = DMatrix::<Complex64>::zeros(0, 0);
        assert_eq!(permanent(&empty).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn hom_permanent_vanishes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)]);
        assert!(permanent(&bs).unwrap().norm() < 1e-16);
        assert!(permanent_naive(&bs).unwrap().norm() < 1e-16);
    }

    #[test]
    fn all_ones_is_factorial() {
        for n in 1..=MAX_PERMANENT_DIM {
            let m = DMatrix::from_element(n, n, c(1.0, 0.0));
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((permanent(&m).unwrap().re - fact).abs() < 1e-9 * fact, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let rect = DMatrix::<Complex64>::zeros(2, 3);
        assert!(matches!(permanent(&rect), Err(Error::Config(_))));
        assert!(matches!(permanent_naive(&rect), Err(Error::Config(_))));
        let big = DMatrix::<Complex64>::zeros(11, 11);
        assert!(permanent(&big).is_err());
    }
}
