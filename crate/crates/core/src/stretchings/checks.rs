//! Pointwise checks of the Beltrami equation, the distortion identity
//! `|Df|² = k J_f`, and empirical Hölder exponents.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::Stretching;
use crate::complexfield::{distortion_of, effective_step, eval_mu, partials, wirtinger, CoefficientSpec, ComplexScalar, MapSpec};
use crate::error::{Error, Result};
use crate::rng::Lcg64;

/// Relative Beltrami residuals at one point, from two independent stencils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltramiResidual {
    /// `|∂̄f − μ∂f| / |∂f|` with Cartesian central differences.
    pub cartesian: f64,
    /// The polar form `(e^{iθ} − μe^{−iθ}) f_ρ + (i/ρ)(e^{iθ} + μe^{−iθ}) f_θ`
    /// from radial/angular differences, divided by `2|∂f|` so that it
    /// estimates the same quantity as `cartesian`.
    pub polar: f64,
}

fn guard(f: &MapSpec, mu: &CoefficientSpec, z: ComplexScalar, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let step = effective_step(z, h);
    let required = 10.0 * step;
    let singular = mu.singular_at_origin() || matches!(f, MapSpec::Stretching(_));
    if singular && z.norm() <= required {
        return Err(Error::EvalAtSingularity { z });
    }
    let mut rays = mu.discontinuity_angles();
    if let MapSpec::Stretching(s) = f {
        rays.extend(s.profile().discontinuities());
    }
    let distance = rays
        .into_iter()
        .map(|phi| super::distance_to_ray(z, phi))
        .fold(f64::INFINITY, f64::min);
    if distance < required {
        return Err(Error::TooCloseToDiscontinuity { z, distance, required });
    }
    Ok(())
}

pub fn beltrami_residual(f: &MapSpec, mu: &CoefficientSpec, z: ComplexScalar, h: f64) -> Result<BeltramiResidual> {
    guard(f, mu, z, h)?;
    let m = eval_mu(mu, z)?;
    let (d, db) = wirtinger(f, z, h)?;
    let cartesian = (db - m * d).norm() / (d.norm() + 1e-300);

    let step = effective_step(z, h);
    let rho = z.norm();
    let theta = z.arg();
    let e = Complex64::from_polar(1.0, theta);
    let f_rho = (f.eval(Complex64::from_polar(rho + step, theta)) - f.eval(Complex64::from_polar(rho - step, theta)))
        / (2.0 * step);
    let dt = step / rho;
    let f_theta = (f.eval(Complex64::from_polar(rho, theta + dt)) - f.eval(Complex64::from_polar(rho, theta - dt)))
        / (2.0 * dt);
    if !(f_rho.re.is_finite() && f_rho.im.is_finite() && f_theta.re.is_finite() && f_theta.im.is_finite()) {
        return Err(Error::StencilOutOfDomain { z });
    }
    let i = Complex64::i();
    let lhs = (e - m * e.conj()) * f_rho + i / rho * (e + m * e.conj()) * f_theta;
    let d_polar = e.conj() * (f_rho - i / rho * f_theta) * 0.5;
    let polar = lhs.norm() / (2.0 * d_polar.norm() + 1e-300);
    Ok(BeltramiResidual { cartesian, polar })
}

/// Both sides of `|Df|² = k(arg z) J_f` from a finite-difference Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionIdentity {
    /// Squared operator norm of the Jacobian.
    pub lhs: f64,
    /// `k(arg z) · det Df`.
    pub rhs: f64,
    pub k: f64,
    pub jacobian_det: f64,
}

impl DistortionIdentity {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

pub fn distortion_identity(f: &Stretching, z: ComplexScalar, h: f64) -> Result<DistortionIdentity> {
    let map = MapSpec::Stretching(f.clone());
    let mu = f.coefficient()?;
    guard(&map, &mu, z, h)?;
    let (fx, fy) = partials(&map, z, h)?;
    let (a, b, c, d) = (fx.re, fy.re, fx.im, fy.im);
    let det = a * d - b * c;
    let frob = a * a + b * b + c * c + d * d;
    let disc = (frob * frob - 4.0 * det * det).max(0.0);
    let lhs = 0.5 * (frob + disc.sqrt());
    let k = f.profile().k(z.arg());
    Ok(DistortionIdentity {
        lhs,
        rhs: k * det,
        k,
        jacobian_det: det,
    })
}

/// `|Df|² = K_μ(z) J_f` for any map solving the Beltrami equation with `μ`;
/// for a stretching `K_μ = k(arg z)` and this agrees with [`distortion_identity`].
pub fn distortion_identity_for(f: &MapSpec, mu: &CoefficientSpec, z: ComplexScalar, h: f64) -> Result<DistortionIdentity> {
    guard(f, mu, z, h)?;
    let k = distortion_of(eval_mu(mu, z)?)?;
    let (fx, fy) = partials(f, z, h)?;
    let (a, b, c, d) = (fx.re, fy.re, fx.im, fy.im);
    let det = a * d - b * c;
    let frob = a * a + b * b + c * c + d * d;
    let disc = (frob * frob - 4.0 * det * det).max(0.0);
    Ok(DistortionIdentity {
        lhs: 0.5 * (frob + disc.sqrt()),
        rhs: k * det,
        k,
        jacobian_det: det,
    })
}

/// Sampling plan for [`empirical_hoelder`].
#[derive(Debug, Clone, PartialEq)]
pub struct HoelderScheme {
    /// Fixed endpoint of the anchored pairs.
    pub anchor: ComplexScalar,
    /// Anchored pairs use distances `2^{-l}` for `l` in `min_level..=max_level`.
    pub min_level: u32,
    pub max_level: u32,
    pub directions: usize,
    /// Number of random base points for the local-slope band.
    pub random_pairs: usize,
    pub sample_radius: f64,
    pub seed: u64,
}

impl Default for HoelderScheme {
    fn default() -> Self {
        Self {
            anchor: Complex64::new(0.0, 0.0),
            min_level: 3,
            max_level: 20,
            directions: 16,
            random_pairs: 256,
            sample_radius: 0.9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoelderEstimate {
    /// Least-squares slope of `log|f(z) − f(a)|` against `log|z − a|`.
    pub slope: f64,
    /// Smallest slope between consecutive dyadic scales at random points.
    pub min_local_slope: f64,
    pub pairs_used: usize,
}

pub fn empirical_hoelder(f: &MapSpec, scheme: &HoelderScheme) -> Result<HoelderEstimate> {
    if scheme.min_level >= scheme.max_level || scheme.directions == 0 {
        return Err(Error::InvalidArgument("Hölder scheme needs at least two levels and one direction".into()));
    }
    let a = scheme.anchor;
    let fa = f.eval(a);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for level in scheme.min_level..=scheme.max_level {
        let delta = (-(level as f64)).exp2();
        for d in 0..scheme.directions {
            let angle = TAU * (d as f64 + 0.25) / scheme.directions as f64;
            let z = a + Complex64::from_polar(delta, angle);
            let inc = (f.eval(z) - fa).norm();
            if inc > 0.0 && inc.is_finite() {
                xs.push(delta.ln());
                ys.push(inc.ln());
            }
        }
    }
    let slope = least_squares_slope(&xs, &ys).ok_or(Error::DegenerateSample)?;

    let mut rng = Lcg64::new(scheme.seed);
    let mut min_local = f64::INFINITY;
    let span = scheme.max_level - scheme.min_level;
    for _ in 0..scheme.random_pairs {
        let z = rng.polar_point(0.0, scheme.sample_radius);
        let dir = Complex64::from_polar(1.0, rng.uniform(0.0, TAU));
        let level = scheme.min_level + (rng.next_u64() % span as u64) as u32;
        let delta = (-(level as f64)).exp2();
        let fz = f.eval(z);
        let s1 = (f.eval(z + dir * delta) - fz).norm();
        let s2 = (f.eval(z + dir * (0.5 * delta)) - fz).norm();
        if s1 > 0.0 && s2 > 0.0 && s1.is_finite() && s2.is_finite() {
            min_local = min_local.min((s1 / s2).log2());
        }
    }
    Ok(HoelderEstimate {
        slope,
        min_local_slope: min_local,
        pairs_used: xs.len(),
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::super::{AngularProfile, SharpExample};
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_map_is_conformal() {
        let z = Complex64::new(0.3, -0.2);
        let r = beltrami_residual(&MapSpec::identity(), &CoefficientSpec::zero(), z, 1e-5).unwrap();
        assert!(r.cartesian <= 1e-10 && r.polar <= 1e-10, "{r:?}");
    }

    #[test]
    fn radial_stretching_solves_its_equation() {
        let z = Complex64::from_polar(0.7, 1.0);
        let mu = CoefficientSpec::radial_stretch(0.5).unwrap();
        let r = beltrami_residual(&MapSpec::radial_stretch(0.5), &mu, z, 1e-5).unwrap();
        assert!(r.cartesian <= 1e-6 && r.polar <= 1e-6, "{r:?}");
        // a mismatched coefficient is not satisfied
        let wrong = CoefficientSpec::radial_stretch(0.6).unwrap();
        let r = beltrami_residual(&MapSpec::radial_stretch(0.5), &wrong, z, 1e-5).unwrap();
        assert!(r.cartesian > 1e-2);
    }

    #[test]
    fn sharp_example_solves_its_equation() {
        let s = SharpExample::new(1.2).unwrap();
        let z = Complex64::from_polar(0.5, 0.3);
        let r = beltrami_residual(&s.map(), s.mu0(), z, 1e-5).unwrap();
        assert!(r.cartesian <= 1e-6 && r.polar <= 1e-6, "{r:?}");
        assert!((r.cartesian - r.polar).abs() <= 1e-6);
    }

    #[test]
    fn guard_band_is_enforced() {
        let s = SharpExample::new(1.2).unwrap();
        let z = Complex64::from_polar(0.5, 1e-6);
        assert!(matches!(
            beltrami_residual(&s.map(), s.mu0(), z, 1e-5),
            Err(Error::TooCloseToDiscontinuity { .. })
        ));
        assert!(matches!(
            beltrami_residual(&s.map(), s.mu0(), Complex64::new(0.0, 0.0), 1e-5),
            Err(Error::EvalAtSingularity { .. })
        ));
    }

    #[test]
    fn distortion_identity_examples() {
        let id = Stretching::new(AngularProfile::constant(1.0).unwrap(), 0.0);
        let d = distortion_identity(&id, Complex64::new(0.4, 0.3), 1e-6).unwrap();
        assert_abs_diff_eq!(d.lhs, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(d.rhs, 1.0, epsilon = 1e-8);

        let radial = Stretching::radial(0.5).unwrap();
        let d = distortion_identity(&radial, Complex64::from_polar(1.3, 0.4), 1e-6).unwrap();
        assert_abs_diff_eq!(d.lhs / d.jacobian_det, 2.0, epsilon = 1e-5);
        assert!(d.relative_gap() <= 1e-5);

        let s = SharpExample::new(1.2).unwrap();
        let d = distortion_identity(s.f0(), Complex64::from_polar(0.6, 2.5), 1e-6).unwrap();
        assert_eq!(d.k, 1.2);
        assert_abs_diff_eq!(d.lhs / d.jacobian_det, 1.2, epsilon = 1e-5);
        assert!(d.jacobian_det > 0.0);
    }

    #[test]
    fn generic_identity_matches_stretching_form() {
        let s = SharpExample::new(1.5).unwrap();
        let z = Complex64::from_polar(0.45, 4.0);
        let a = distortion_identity(s.f0(), z, 1e-6).unwrap();
        let b = distortion_identity_for(&s.map(), s.mu0(), z, 1e-6).unwrap();
        assert_abs_diff_eq!(a.k, b.k, epsilon = 1e-12);
        assert_abs_diff_eq!(a.lhs, b.lhs, epsilon = 0.0);
        let d = distortion_identity_for(&MapSpec::identity(), &CoefficientSpec::zero(), z, 1e-5).unwrap();
        assert!(d.relative_gap() <= 1e-10);
    }

    #[test]
    fn hoelder_slopes() {
        let scheme = HoelderScheme::default();
        let e = empirical_hoelder(&MapSpec::identity(), &scheme).unwrap();
        assert_abs_diff_eq!(e.slope, 1.0, epsilon = 1e-6);
        let e = empirical_hoelder(&MapSpec::radial_stretch(0.5), &scheme).unwrap();
        assert_abs_diff_eq!(e.slope, 0.5, epsilon = 1e-6);
        let s = SharpExample::new(1.2).unwrap();
        let e = empirical_hoelder(&s.map(), &scheme).unwrap();
        assert_abs_diff_eq!(e.slope, 11.0 / 12.0, epsilon = 0.02);
        assert!(e.min_local_slope > 0.5);
    }

    #[test]
    fn constant_map_is_degenerate() {
        let f = MapSpec::closed_form("const", |_| Complex64::new(1.0, 2.0));
        assert_eq!(empirical_hoelder(&f, &HoelderScheme::default()), Err(Error::DegenerateSample));
    }
}
