//! Normalized circle averages of `⟨n, A_μ n⟩`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complexfield::{eval_mu, z_over_zbar, CoefficientKind, CoefficientSpec, ComplexScalar};
use crate::elliptic::{boundary_quadratic, distortion_minus_correction};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, GaussLegendre};
use crate::stretchings::normalize_angle;

/// The circle `S_ρ(x) = {x + ρe^{it}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn new(center: ComplexScalar, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid circle radius {radius}")));
        }
        Ok(Self {
            center: [center.re, center.im],
            radius,
        })
    }

    pub fn center(&self) -> ComplexScalar {
        Complex64::new(self.center[0], self.center[1])
    }

    pub fn point(&self, t: f64) -> ComplexScalar {
        self.center() + Complex64::from_polar(self.radius, t)
    }
}

/// Points of a circle written relative to its closest approach to the origin:
/// with `u = x/|x|` and `t = t_c + δ`, `x + ρe^{it} = u(|x| − ρ + 2ρ sin²(δ/2) − iρ sin δ)`.
/// Unlike `x + ρe^{it}` this keeps full relative accuracy when the circle
/// passes very close to the origin.
struct OriginRelative {
    unit: ComplexScalar,
    closest: f64,
    gap: f64,
    radius: f64,
}

impl OriginRelative {
    fn new(circle: &Circle) -> Self {
        let x = circle.center();
        let norm = x.norm();
        let unit = if norm > 0.0 { x / norm } else { Complex64::new(1.0, 0.0) };
        Self {
            unit,
            closest: (-unit).arg(),
            gap: norm - circle.radius,
            radius: circle.radius,
        }
    }

    fn point(&self, t: f64) -> ComplexScalar {
        let d = t - self.closest;
        let h = (0.5 * d).sin();
        self.unit * Complex64::new(self.gap + 2.0 * self.radius * h * h, -self.radius * d.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureOptions {
    /// Gauss–Legendre nodes per panel.
    pub base_nodes: usize,
    /// Extra parameter angles `t` at which the integrand may jump.
    pub split_angles: Vec<f64>,
    /// Target error of the average relative to its unit scale.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            base_nodes: 16,
            split_angles: Vec::new(),
            rel_tol: 1e-11,
        }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        if self.base_nodes < 16 {
            return Err(Error::InvalidArgument(format!(
                "base_nodes must be at least 16, got {}",
                self.base_nodes
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("rel_tol must be positive".into()));
        }
        if self.split_angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("split angles must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleAverage {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Which closed form of the integrand to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrandForm {
    /// `K_μ − 2(|μ| + Re(μ n̄²))/(1 − |μ|²)`.
    Distortion,
    /// `⟨n, A_μ n⟩` from the matrix entries.
    Matrix,
}

/// Parameter values `t` where the circle crosses the ray `arg z = φ`.
pub fn ray_crossings(circle: &Circle, phi: f64) -> Vec<f64> {
    let x = circle.center();
    let rho = circle.radius;
    let dir = Complex64::from_polar(1.0, phi);
    // |s·dir − x|² = ρ²  ⇔  s² − 2bs + (|x|² − ρ²) = 0
    let b = x.re * dir.re + x.im * dir.im;
    let cst = x.norm_sqr() - rho * rho;
    let disc = b * b - cst;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let big = if b >= 0.0 { b + sq } else { b - sq };
    let mut roots = vec![big];
    if big != 0.0 {
        roots.push(cst / big);
    }
    roots
        .into_iter()
        .filter(|s| *s > 0.0)
        .map(|s| normalize_angle((dir * s - x).arg()))
        .collect()
}

/// Sorted panel boundaries on `[0, 2π]` for the given circle.
fn panel_breaks(spec: &CoefficientSpec, circle: &Circle, opts: &QuadratureOptions) -> Vec<f64> {
    let mut angles: Vec<f64> = opts.split_angles.iter().map(|a| normalize_angle(*a)).collect();
    for phi in spec.discontinuity_angles() {
        angles.extend(ray_crossings(circle, phi));
    }
    if spec.singular_at_origin() {
        let x = circle.center();
        if x.norm_sqr() > 0.0 {
            // closest approach to the origin, where the integrand varies fastest
            angles.push(normalize_angle((-x).arg()));
        }
    }
    let mut breaks = vec![0.0, TAU];
    breaks.extend(angles);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if let Some(last) = breaks.last_mut() {
        *last = TAU;
    }
    breaks
}

pub fn circle_average(spec: &CoefficientSpec, circle: &Circle, opts: &QuadratureOptions) -> Result<CircleAverage> {
    opts.validate()?;
    let rule = GaussLegendre::new(opts.base_nodes);
    circle_average_with(spec, circle, opts, &rule, IntegrandForm::Distortion)
}

/// Same average computed from `⟨n, A_μ n⟩` directly.
pub fn circle_average_matrix_form(spec: &CoefficientSpec, circle: &Circle, opts: &QuadratureOptions) -> Result<CircleAverage> {
    opts.validate()?;
    let rule = GaussLegendre::new(opts.base_nodes);
    circle_average_with(spec, circle, opts, &rule, IntegrandForm::Matrix)
}

pub(crate) fn circle_average_with(
    spec: &CoefficientSpec,
    circle: &Circle,
    opts: &QuadratureOptions,
    rule: &GaussLegendre,
    form: IntegrandForm,
) -> Result<CircleAverage> {
    if spec.singular_at_origin() {
        let gap = (circle.center().norm() - circle.radius).abs();
        if gap <= 1e-12 * circle.radius {
            return Err(Error::EvalAtSingularity {
                z: Complex64::new(0.0, 0.0),
            });
        }
    }
    let breaks = panel_breaks(spec, circle, opts);
    let profile = match spec.kind() {
        CoefficientKind::PolarProfile(p) => Some(p),
        _ => None,
    };
    let points = OriginRelative::new(circle);
    let mut out = CircleAverage {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Every ray crossing is a panel boundary, so the whole panel lies in
        // the sector of its midpoint.
        let sector = profile.map(|p| p.sector_of(points.point(0.5 * (a + b)).arg()));
        let part = integrate_panels(rule, &[a, b], opts.rel_tol * (b - a), |t| {
            let z = points.point(t);
            let mu = match (profile, sector) {
                (Some(p), Some(s)) => {
                    if z.norm_sqr() == 0.0 {
                        return Err(Error::EvalAtSingularity { z });
                    }
                    let k = p.k_in_sector(z.arg(), s);
                    z_over_zbar(z) * ((1.0 - k) / (1.0 + k))
                }
                _ => eval_mu(spec, z)?,
            };
            match form {
                IntegrandForm::Distortion => distortion_minus_correction(mu, t),
                IntegrandForm::Matrix => boundary_quadratic(mu, t),
            }
        })?;
        out.value += part.value;
        out.error_estimate += part.error_estimate;
        out.evaluations += part.evaluations;
    }
    out.value /= TAU;
    out.error_estimate /= TAU;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stretchings::AngularProfile;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    /// Midpoint (periodic trapezoid) rule on `n` nodes.
    fn trapezoid_oracle(spec: &CoefficientSpec, circle: &Circle, n: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let t = TAU * (i as f64 + 0.5) / n as f64;
            let mu = eval_mu(spec, circle.point(t)).unwrap();
            s += distortion_minus_correction(mu, t).unwrap();
        }
        s / n as f64
    }

    #[test]
    fn zero_coefficient_averages_to_one() {
        let a = circle_average(&CoefficientSpec::zero(), &Circle::new(c(0.2, 0.1), 0.3).unwrap(), &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(a.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_phase_origin_circle_gives_c() {
        let spec = CoefficientSpec::polar_profile(AngularProfile::two_phase(1.2).unwrap()).unwrap();
        let a = circle_average(&spec, &Circle::new(c(0.0, 0.0), 0.5).unwrap(), &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(a.value, 12.0 / 11.0, epsilon = 1e-8);
    }

    #[test]
    fn radial_stretch_off_center_matches_dense_trapezoid() {
        let spec = CoefficientSpec::radial_stretch(0.5).unwrap();
        let circle = Circle::new(c(0.3, 0.0), 0.2).unwrap();
        let a = circle_average(&spec, &circle, &QuadratureOptions::default()).unwrap();
        let oracle = trapezoid_oracle(&spec, &circle, 1_000_000);
        assert!(a.value < 2.0);
        assert_abs_diff_eq!(a.value, oracle, epsilon = 1e-7);
    }

    #[test]
    fn both_integrand_forms_agree() {
        let spec = CoefficientSpec::polar_profile(AngularProfile::two_phase(1.7).unwrap()).unwrap();
        let circle = Circle::new(c(0.1, -0.25), 0.4).unwrap();
        let a = circle_average(&spec, &circle, &QuadratureOptions::default()).unwrap();
        let b = circle_average_matrix_form(&spec, &circle, &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
    }

    #[test]
    fn crossings_lie_on_the_ray() {
        let circle = Circle::new(c(0.3, 0.2), 0.5).unwrap();
        for phi in [0.0, 1.0, PI, 4.5] {
            let ts = ray_crossings(&circle, phi);
            // circle contains the origin: exactly one crossing per ray
            assert_eq!(ts.len(), 1);
            let p = circle.point(ts[0]);
            assert_abs_diff_eq!(normalize_angle(p.arg()), phi, epsilon = 1e-12);
        }
        let far = Circle::new(c(2.0, 0.0), 0.5).unwrap();
        assert_eq!(ray_crossings(&far, 0.0).len(), 2);
        assert!(ray_crossings(&far, PI).is_empty());
    }

    #[test]
    fn circle_through_singularity_is_rejected() {
        let spec = CoefficientSpec::radial_stretch(0.5).unwrap();
        let r = circle_average(&spec, &Circle::new(c(0.3, 0.0), 0.3).unwrap(), &QuadratureOptions::default());
        assert!(matches!(r, Err(Error::EvalAtSingularity { .. })));
    }

    #[test]
    fn doubling_nodes_changes_little() {
        let spec = CoefficientSpec::radial_stretch(0.25).unwrap();
        let circle = Circle::new(c(-0.2, 0.35), 0.3).unwrap();
        let mut opts = QuadratureOptions::default();
        let a = circle_average(&spec, &circle, &opts).unwrap();
        opts.base_nodes = 32;
        let b = circle_average(&spec, &circle, &opts).unwrap();
        assert!((a.value - b.value).abs() < opts.rel_tol);
    }

    #[test]
    fn origin_relative_points_match_direct_form() {
        for (x, r) in [(c(0.3, -0.2), 0.7), (c(0.0, 0.0), 0.4), (c(-0.5, 0.1), 0.2)] {
            let circle = Circle::new(x, r).unwrap();
            let pts = OriginRelative::new(&circle);
            for i in 0..64 {
                let t = TAU * i as f64 / 64.0;
                assert_abs_diff_eq!((pts.point(t) - circle.point(t)).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn circle_grazing_the_singular_point_is_accurate() {
        let spec = CoefficientSpec::polar_profile(AngularProfile::two_phase(1.2).unwrap()).unwrap();
        let x = Complex64::from_polar(17.0 / 41.0, TAU * 11.0 / 41.0);
        let circle = Circle::new(x, x.norm() - 7e-10).unwrap();
        let a = circle_average(&spec, &circle, &QuadratureOptions::default()).unwrap();
        let oracle = {
            let mut s = 0.0;
            let n = 200_000;
            for i in 0..n {
                let t = TAU * (i as f64 + 0.5) / n as f64;
                let z = circle.point(t);
                let mu = eval_mu(&spec, z).unwrap();
                s += distortion_minus_correction(mu, t).unwrap();
            }
            s / n as f64
        };
        // the oracle misses the 1e-9-wide feature at the closest point
        assert_abs_diff_eq!(a.value, oracle, epsilon = 1e-6);
    }

    #[test]
    fn options_are_validated() {
        let opts = QuadratureOptions {
            base_nodes: 8,
            ..Default::default()
        };
        assert!(circle_average(&CoefficientSpec::zero(), &Circle::new(c(0.0, 0.0), 0.5).unwrap(), &opts).is_err());
    }
}
