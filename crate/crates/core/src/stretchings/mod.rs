//! Generalized radial stretchings `f(z) = |z|^α (η₁(arg z) + i η₂(arg z))`.
//!
//! The angular part solves `(η₁ + iη₂)' = iαk(η₁ + iη₂)`, so it is
//! `e^{i(Φ(θ) + φ₀)}` with the accumulated phase `Φ(θ) = α ∫_0^θ k`. A
//! 2π-periodic solution with winding number one needs `α ∫_0^{2π} k = 2π`.

mod checks;
mod profile;
mod sharp;

use std::f64::consts::TAU;

use num_complex::Complex64;

pub use checks::{
    beltrami_residual, distortion_identity, distortion_identity_for, empirical_hoelder, BeltramiResidual, DistortionIdentity,
    HoelderEstimate, HoelderScheme,
};
pub use profile::{distance_to_ray, normalize_angle, AngularProfile, ProfileFn};
pub use sharp::SharpExample;

use crate::complexfield::{CoefficientSpec, ComplexScalar};
use crate::error::Result;

/// `α = 2π / ∫_0^{2π} k`, the only exponent making the angular part periodic.
pub fn alpha_from_profile(profile: &AngularProfile) -> f64 {
    TAU / profile.period_integral()
}

/// A generalized radial stretching with unit amplitude.
#[derive(Debug, Clone)]
pub struct Stretching {
    alpha: f64,
    profile: AngularProfile,
    phase0: f64,
}

impl Stretching {
    pub fn new(profile: AngularProfile, phase0: f64) -> Self {
        Self {
            alpha: alpha_from_profile(&profile),
            profile,
            phase0,
        }
    }

    /// The classical radial stretching `|z|^{α−1} z` (constant `k = 1/α`).
    pub fn radial(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "stretching exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self::new(AngularProfile::constant(1.0 / alpha)?, 0.0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn profile(&self) -> &AngularProfile {
        &self.profile
    }

    pub fn phase0(&self) -> f64 {
        self.phase0
    }

    /// `Φ(θ) = α ∫_0^θ k`, continued to all of ℝ by `Φ(θ + 2π) = Φ(θ) + 2π`.
    pub fn cumulative_phase(&self, theta: f64) -> f64 {
        let turns = (theta / TAU).floor();
        let reduced = normalize_angle(theta);
        TAU * turns + self.alpha * self.profile.integral_to(reduced)
    }

    /// The Beltrami coefficient this stretching solves, `(1−k)/(1+k) z/z̄`.
    pub fn coefficient(&self) -> Result<CoefficientSpec> {
        CoefficientSpec::polar_profile(self.profile.clone())
    }

    pub fn map(&self, z: ComplexScalar) -> ComplexScalar {
        stretch_map(self, z)
    }
}

/// `(η₁(θ), η₂(θ)) = (cos(Φ(θ) + φ₀), sin(Φ(θ) + φ₀))`.
pub fn eta(stretching: &Stretching, theta: f64) -> (f64, f64) {
    let (s, c) = (stretching.cumulative_phase(theta) + stretching.phase0).sin_cos();
    (c, s)
}

/// `|z|^α (η₁(arg z) + iη₂(arg z))`, with `f(0) = 0`.
pub fn stretch_map(stretching: &Stretching, z: ComplexScalar) -> ComplexScalar {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (e1, e2) = eta(stretching, z.arg());
    Complex64::new(e1, e2) * r.powf(stretching.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_from_profile(&AngularProfile::constant(1.0).unwrap()), 1.0);
        assert_abs_diff_eq!(alpha_from_profile(&AngularProfile::constant(4.0).unwrap()), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            alpha_from_profile(&AngularProfile::two_phase(1.2).unwrap()),
            11.0 / 12.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn conformal_profile_recovers_radial_stretching() {
        let s = Stretching::new(AngularProfile::constant(1.0).unwrap(), 0.0);
        for t in [0.0, 0.5, 2.0, 4.0, 6.2] {
            let (a, b) = eta(&s, t);
            assert_abs_diff_eq!(a, t.cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(b, t.sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn map_examples() {
        let s = Stretching::radial(0.5).unwrap();
        assert_eq!(stretch_map(&s, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let v = stretch_map(&s, Complex64::new(4.0, 0.0));
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        // matches |z|^{α−1} z away from the positive axis
        let z = Complex64::from_polar(0.7, 2.5);
        let w = z * z.norm().powf(-0.5);
        assert!((stretch_map(&s, z) - w).norm() < 1e-14);
    }

    #[test]
    fn phase_continues_across_turns() {
        let s = Stretching::new(AngularProfile::two_phase(2.0).unwrap(), 0.3);
        assert_abs_diff_eq!(s.cumulative_phase(TAU), TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cumulative_phase(-PI) + TAU, s.cumulative_phase(PI), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn amplitude_and_periodicity(m in 1.001f64..20.0, theta in -20.0f64..20.0, phase in -3.0f64..3.0) {
            let s = Stretching::new(AngularProfile::two_phase(m).unwrap(), phase);
            let (a, b) = eta(&s, theta);
            prop_assert!((a * a + b * b - 1.0).abs() <= 1e-12);
            let (a2, b2) = eta(&s, theta + TAU);
            prop_assert!((a - a2).abs() <= 1e-12 && (b - b2).abs() <= 1e-12);
        }

        #[test]
        fn eta_solves_the_first_order_system(m in 1.001f64..10.0, theta in 0.0f64..6.28) {
            let s = Stretching::new(AngularProfile::two_phase(m).unwrap(), -0.75 * PI);
            let h = 1e-5;
            prop_assume!(s.profile().distance_to_rays(Complex64::from_polar(1.0, theta)) > 10.0 * h);
            let (p1, p2) = eta(&s, theta + h);
            let (m1, m2) = eta(&s, theta - h);
            let (e1, e2) = eta(&s, theta);
            let k = s.profile().k(theta);
            let ak = s.alpha() * k;
            prop_assert!(((p1 - m1) / (2.0 * h) + ak * e2).abs() <= 1e-8);
            prop_assert!(((p2 - m2) / (2.0 * h) - ak * e1).abs() <= 1e-8);
        }
    }
}
