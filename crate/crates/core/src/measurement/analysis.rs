use std::f64::consts::PI;

use crate::fock::{reduce_angle, DensityMatrix, PolarizationState};
use crate::{Error, Result, HERMITICITY_TOLERANCE};

/// Required closeness of the purity to 1 for [`polarization_angle`].
pub const PURE_TOLERANCE: f64 = 1e-6;

/// Allowed distance of the H/V relative phase from 0 or π.
pub const LINEAR_PHASE_TOLERANCE: f64 = 1e-6;

/// `⟨target|ρ|target⟩` for a single-photon polarization state, clipped to
/// `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, target: &PolarizationState) -> Result<f64> {
    let (_, q) = rho.single_qubit()?;
    let t = target.components();
    let mut acc = num_complex::Complex64::default();
    for i in 0..2 {
        for j in 0..2 {
            acc += t[i].conj() * q[(i, j)] * t[j];
        }
    }
    if acc.im.abs() > HERMITICITY_TOLERANCE {
        return Err(Error::numerical(format!(
            "fidelity has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Lab-frame angle in `[0, π)` of a pure, linearly polarized single photon.
pub fn polarization_angle(rho: &DensityMatrix) -> Result<f64> {
    let (_, q) = rho.single_qubit()?;
    let p = rho.purity();
    if (p - 1.0).abs() > PURE_TOLERANCE {
        return Err(Error::analysis(format!(
            "state is mixed (purity {p:.9}), no single polarization angle"
        )));
    }
    let h2 = q[(0, 0)].re.max(0.0);
    let v2 = q[(1, 1)].re.max(0.0);
    let hv = q[(0, 1)];
    let theta = if hv.norm() > 1e-9 {
        let phase = hv.arg().abs();
        let off = phase.min(PI - phase);
        if off > LINEAR_PHASE_TOLERANCE {
            return Err(Error::analysis(format!(
                "polarization is elliptical (H/V relative phase {:.9} rad)",
                hv.arg()
            )));
        }
        let sign = if phase < PI / 2.0 { 1.0 } else { -1.0 };
        (sign * v2.sqrt()).atan2(h2.sqrt())
    } else if h2 >= v2 {
        0.0
    } else {
        PI / 2.0
    };
    Ok(reduce_angle(theta))
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    use super::*;

    fn pure(theta: f64) -> DensityMatrix {
        DensityMatrix::pure_polarization("l", &PolarizationState::linear(theta))
    }

    fn mixed() -> DensityMatrix {
        let basis = pure(0.0).basis().to_vec();
        DensityMatrix::new(basis, DMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn fidelity_cases() {
        let h = PolarizationState::linear(0.0);
        let v = PolarizationState::linear(PI / 2.0);
        assert_eq!(fidelity(&pure(0.0), &h).unwrap(), 1.0);
        assert!(fidelity(&pure(0.0), &v).unwrap() < 1e-30);
        for t in [0.0, 0.3, 2.0] {
            let f = fidelity(&mixed(), &PolarizationState::linear(t)).unwrap();
            assert!((f - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn purity_cases() {
        assert!((purity(&pure(0.8)) - 1.0).abs() < 1e-15);
        assert!((purity(&mixed()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angle_cases() {
        assert_eq!(polarization_angle(&pure(0.0)).unwrap(), 0.0);
        for t in [0.1, 0.7, PI / 2.0, 2.5, 3.1] {
            let got = polarization_angle(&pure(t)).unwrap();
            assert!((got - t).abs() < 1e-9, "{t} -> {got}");
        }
        // angles differing by π are the same polarization
        let got = polarization_angle(&pure(-0.4)).unwrap();
        assert!((got - (PI - 0.4)).abs() < 1e-9);

        let err = polarization_angle(&mixed()).unwrap_err().to_string();
        assert!(err.contains("mixed"), "{err}");

        let circ = PolarizationState::new(
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        )
        .unwrap();
        let err = polarization_angle(&DensityMatrix::pure_polarization("l", &circ))
            .unwrap_err()
            .to_string();
        assert!(err.contains("elliptical"), "{err}");
    }
}
