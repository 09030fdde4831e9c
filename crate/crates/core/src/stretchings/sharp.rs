//! The two-phase example `(k₀, f₀, μ₀)` attaining exponent `1/c`,
//! `c = 2/(1 + 1/M)`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::{normalize_angle, AngularProfile, Stretching};
use crate::complexfield::{CoefficientSpec, ComplexScalar, MapSpec};
use crate::elliptic::{a_polar, RotationAngle, SymMatrix2};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SharpExample {
    m: f64,
    c: f64,
    k0: AngularProfile,
    f0: Stretching,
    mu0: CoefficientSpec,
}

/// Phase of `Θ₁(0) + iΘ₂(0) = e^{−3iπ/4}`.
pub const SHARP_PHASE0: f64 = -3.0 * FRAC_PI_4;

impl SharpExample {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 1.0 {
            return Err(Error::InvalidArgument(format!("M must exceed 1 (got {m})")));
        }
        let k0 = AngularProfile::two_phase(m)?;
        let f0 = Stretching::new(k0.clone(), SHARP_PHASE0);
        let mu0 = CoefficientSpec::polar_profile(k0.clone())?;
        Ok(Self {
            m,
            c: c_of(m),
            k0,
            f0,
            mu0,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k0(&self) -> &AngularProfile {
        &self.k0
    }

    pub fn f0(&self) -> &Stretching {
        &self.f0
    }

    pub fn mu0(&self) -> &CoefficientSpec {
        &self.mu0
    }

    pub fn map(&self) -> MapSpec {
        MapSpec::Stretching(self.f0.clone())
    }

    /// `(Θ₁(θ), Θ₂(θ))` from the four closed-form branches.
    pub fn theta_closed_form(&self, theta: f64) -> (f64, f64) {
        let c = self.c;
        let m = self.m;
        let q = c * PI / 2.0;
        let t = normalize_angle(theta);
        if t < q {
            let a = t / c - FRAC_PI_4;
            (a.sin(), -a.cos())
        } else if t < PI {
            let a = m / c * (t - q) - FRAC_PI_4;
            (a.cos(), a.sin())
        } else if t < PI + q {
            let a = (t - PI) / c - FRAC_PI_4;
            (-a.sin(), a.cos())
        } else {
            let a = m / c * (t - PI - q) - FRAC_PI_4;
            (-a.cos(), -a.sin())
        }
    }

    /// `u₀ = |z|^{1/c} Θ₁(arg z)`.
    pub fn u0(&self, z: ComplexScalar) -> f64 {
        let r = z.norm();
        if r == 0.0 {
            return 0.0;
        }
        r.powf(1.0 / self.c) * self.theta_closed_form(z.arg()).0
    }

    /// `A₀(z) = J(arg z) diag(k₀, 1/k₀) J(arg z)*`.
    pub fn a0(&self, z: ComplexScalar) -> Result<SymMatrix2> {
        if z.norm_sqr() == 0.0 {
            return Err(Error::EvalAtSingularity { z });
        }
        let theta = z.arg();
        a_polar(self.k0.k(theta), RotationAngle(theta))
    }

    /// `f₀` built directly from the closed-form `Θ₁, Θ₂`.
    pub fn f0_closed_form(&self, z: ComplexScalar) -> ComplexScalar {
        let r = z.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (a, b) = self.theta_closed_form(z.arg());
        Complex64::new(a, b) * r.powf(1.0 / self.c)
    }
}

/// `c(M) = 2/(1 + 1/M)`.
pub fn c_of(m: f64) -> f64 {
    2.0 / (1.0 + 1.0 / m)
}
