use std::f64::consts::PI;

use num_complex::Complex64;

/// Reduces a polarization angle to `[0, π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly PI for tiny negative inputs.
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Jones vector `(cos θ, sin θ)` of linear polarization at `theta`.
pub fn linear(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// Normalized single-photon polarization state in the lab `{H, V}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub h: Complex64,
    pub v: Complex64,
}

impl PolarizationState {
    pub fn linear(theta: f64) -> Self {
        let [c, s] = linear(theta);
        PolarizationState {
            h: Complex64::new(c, 0.0),
            v: Complex64::new(s, 0.0),
        }
    }

    /// Normalizes `(h, v)`; `None` for the zero vector.
    pub fn new(h: Complex64, v: Complex64) -> Option<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(PolarizationState {
            h: h / norm,
            v: v / norm,
        })
    }

    /// `alpha·|θ⟩ + beta·|θ + π/2⟩` for real coefficients.
    pub fn in_basis(theta: f64, alpha: f64, beta: f64) -> Option<Self> {
        let [c, s] = linear(theta);
        Self::new(
            Complex64::new(alpha * c - beta * s, 0.0),
            Complex64::new(alpha * s + beta * c, 0.0),
        )
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.h, self.v]
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> f64 {
        (self.h.conj() * other.h + self.v.conj() * other.v).norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_angle_wraps_into_half_turn() {
        assert_eq!(reduce_angle(0.0), 0.0);
        assert!((reduce_angle(PI + 0.25) - 0.25).abs() < 1e-15);
        assert!((reduce_angle(-0.25) - (PI - 0.25)).abs() < 1e-15);
        assert!(reduce_angle(-1e-300) < PI);
    }

    #[test]
    fn basis_combination_matches_rotation() {
        let theta = 0.3;
        let s = PolarizationState::in_basis(theta, 0.0, 1.0).unwrap();
        let perp = PolarizationState::linear(theta + PI / 2.0);
        assert!((s.overlap(&perp) - 1.0).abs() < 1e-15);
        assert!(PolarizationState::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_none());
    }
}
