//! Reduction of the Beltrami equation to `div(A_μ ∇u) = 0` with a symmetric,
//! unit-determinant coefficient matrix.
//!
//! For `μ = μ₁ + iμ₂` with `|μ| < 1`:
//!
//! ```text
//! a11 = (1 − 2μ₁ + |μ|²)/(1 − |μ|²)
//! a22 = (1 + 2μ₁ + |μ|²)/(1 − |μ|²)
//! a12 = a21 = −2μ₂/(1 − |μ|²)
//! ```
//!
//! and on a circle with outer normal `n = e^{it}` the boundary form satisfies
//! `⟨n, A_μ n⟩ = K_μ − 2(|μ| + Re(μ e^{−2it}))/(1 − |μ|²)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::complexfield::{eval_mu, ComplexScalar, CoefficientSpec, Disk};
use crate::error::{Error, Result};

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    /// `a11·a22 − a12²` with the rounding of the product recovered by an FMA,
    /// so the result is accurate even when the two products nearly cancel.
    pub fn det(&self) -> f64 {
        let w = self.a12 * self.a12;
        let e = (-self.a12).mul_add(self.a12, w);
        let f = self.a11.mul_add(self.a22, -w);
        f + e
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a11 > 0.0 && self.det() > 0.0
    }

    /// Eigenvalues `(λ_max, λ_min)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_diff = 0.5 * (self.a11 - self.a22);
        let r = half_diff.hypot(self.a12);
        (mean + r, mean - r)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a12 * v[0] + self.a22 * v[1],
        ]
    }

    /// `⟨v, A v⟩`.
    pub fn quadratic(&self, v: [f64; 2]) -> f64 {
        self.a11 * v[0] * v[0] + 2.0 * self.a12 * v[0] * v[1] + self.a22 * v[1] * v[1]
    }

    /// `⟨w, A v⟩`.
    pub fn bilinear(&self, w: [f64; 2], v: [f64; 2]) -> f64 {
        let av = self.apply(v);
        w[0] * av[0] + w[1] * av[1]
    }
}

/// Angle of the rotation `J(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle(pub f64);

impl RotationAngle {
    /// Row-major entries of `J(θ)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.0.sin_cos();
        [[c, -s], [s, c]]
    }
}

/// `1 − |μ|²`, with the squares split exactly so that the result keeps full
/// relative accuracy as `|μ| → 1`.
fn one_minus_norm_sqr(mu: ComplexScalar) -> Result<f64> {
    let (x, y) = (mu.re.abs(), mu.im.abs());
    let (big, small) = if x >= y { (x, y) } else { (y, x) };
    let pb = big * big;
    let eb = big.mul_add(big, -pb);
    let ps = small * small;
    let es = small.mul_add(small, -ps);
    // 1 − pb = s + t exactly
    let s = 1.0 - pb;
    let v = s - 1.0;
    let t = (1.0 - (s - v)) + (-pb - v);
    let d = (s - ps) + (t - eb - es);
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NotUniformlyElliptic { value: mu.norm() });
    }
    Ok(d)
}

pub fn a_mu(mu: ComplexScalar) -> Result<SymMatrix2> {
    let d = one_minus_norm_sqr(mu)?;
    let (x, y) = (mu.re, mu.im);
    // 1 ∓ 2μ₁ + |μ|² = (1 ∓ μ₁)² + μ₂², free of cancellation
    Ok(SymMatrix2 {
        a11: (1.0 - x).mul_add(1.0 - x, y * y) / d,
        a12: -2.0 * y / d,
        a22: (1.0 + x).mul_add(1.0 + x, y * y) / d,
    })
}

/// `J(θ) diag(k, 1/k) J(θ)*`, expanded.
pub fn a_polar(k: f64, theta: RotationAngle) -> Result<SymMatrix2> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidDistortion { k });
    }
    let (s, c) = theta.0.sin_cos();
    let inv = 1.0 / k;
    Ok(SymMatrix2 {
        a11: k * c * c + inv * s * s,
        a12: (k - inv) * s * c,
        a22: inv * c * c + k * s * s,
    })
}

/// `⟨e^{it}, A_μ e^{it}⟩` from the matrix entries.
pub fn boundary_quadratic(mu: ComplexScalar, t: f64) -> Result<f64> {
    let a = a_mu(mu)?;
    let (s, c) = t.sin_cos();
    Ok(a.quadratic([c, s]))
}

/// `2(|μ| + Re(μ e^{−2it}))/(1 − |μ|²) ≥ 0`.
pub fn correction_term(mu: ComplexScalar, t: f64) -> Result<f64> {
    let d = one_minus_norm_sqr(mu)?;
    Ok(2.0 * correction_numerator(mu, t) / d)
}

/// `|μ| + Re(μ n̄²)`, clamped at zero: it is nonnegative exactly and negative
/// values are rounding.
fn correction_numerator(mu: ComplexScalar, t: f64) -> f64 {
    let n2 = Complex64::from_polar(1.0, -2.0 * t);
    (mu.norm() + (mu * n2).re).max(0.0)
}

/// `K_μ − correction_term(μ, t)`: the circle-average integrand written in
/// terms of the coefficient alone. Both terms are put over the common
/// denominator `1 − |μ|²`, using `K_μ = (1 + |μ|)²/(1 − |μ|²)`, before subtracting.
pub fn distortion_minus_correction(mu: ComplexScalar, t: f64) -> Result<f64> {
    let d = one_minus_norm_sqr(mu)?;
    let r = mu.norm();
    let k_num = (1.0 + r) * (1.0 + r);
    Ok((k_num - 2.0 * correction_numerator(mu, t)) / d)
}

/// `A_μ(z)` for a coefficient field.
pub fn a_field(spec: &CoefficientSpec, z: ComplexScalar) -> Result<SymMatrix2> {
    a_mu(eval_mu(spec, z)?)
}

/// Radial test function `ψ(r) = (1 − (r/R)²)³` on the disk of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: ComplexScalar,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: ComplexScalar, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid bump radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn value(&self, z: ComplexScalar) -> f64 {
        let s = (z - self.center).norm_sqr() / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(3)
        }
    }

    pub fn gradient(&self, z: ComplexScalar) -> [f64; 2] {
        let d = z - self.center;
        let r2 = self.radius * self.radius;
        let s = d.norm_sqr() / r2;
        if s >= 1.0 {
            return [0.0, 0.0];
        }
        let g = -6.0 * (1.0 - s).powi(2) / r2;
        [g * d.re, g * d.im]
    }
}

#[derive(Debug, Clone)]
pub struct WeakResidualOptions {
    /// Domain on which the fields are defined; the bump must fit inside it.
    pub domain: Option<Disk>,
    /// Point where the coefficient or the candidate solution is singular;
    /// grid nodes within `4 · mesh_h` of it are skipped.
    pub singular_point: Option<ComplexScalar>,
}

impl Default for WeakResidualOptions {
    fn default() -> Self {
        Self {
            domain: Some(Disk::unit()),
            singular_point: None,
        }
    }
}

/// `|Σ h² ⟨A∇u, ∇ψ⟩|` over the uniform grid `center + h(i, j)` inside the bump
/// support, with `∇u` from central differences of step `h` and `∇ψ` exact.
pub fn weak_residual<A, U>(a_field: A, u_field: U, bump: &Bump, mesh_h: f64, opts: &WeakResidualOptions) -> Result<f64>
where
    A: Fn(ComplexScalar) -> Result<SymMatrix2> + Sync,
    U: Fn(ComplexScalar) -> f64 + Sync,
{
    Ok(weak_form(a_field, u_field, bump, mesh_h, opts)?.abs())
}

/// Signed value of the discrete weak form `Σ h² ⟨A∇u, ∇ψ⟩`.
pub fn weak_form<A, U>(a_field: A, u_field: U, bump: &Bump, mesh_h: f64, opts: &WeakResidualOptions) -> Result<f64>
where
    A: Fn(ComplexScalar) -> Result<SymMatrix2> + Sync,
    U: Fn(ComplexScalar) -> f64 + Sync,
{
    if !(mesh_h > 0.0 && mesh_h.is_finite()) {
        return Err(Error::InvalidArgument(format!("mesh_h must be positive, got {mesh_h}")));
    }
    if let Some(d) = opts.domain {
        // The u-stencil reaches one step beyond the support.
        if !d.contains_disk(bump.center, bump.radius + mesh_h, 0.0) {
            return Err(Error::SupportOutOfDomain);
        }
    }
    let n = (bump.radius / mesh_h).floor() as i64;
    let exclusion = 4.0 * mesh_h;
    let rows: Vec<f64> = (-n..=n)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let mut row = 0.0;
            for i in -n..=n {
                let p = bump.center + Complex64::new(i as f64 * mesh_h, j as f64 * mesh_h);
                let grad_psi = bump.gradient(p);
                if grad_psi == [0.0, 0.0] {
                    continue;
                }
                if let Some(s) = opts.singular_point {
                    if (p - s).norm() < exclusion {
                        continue;
                    }
                }
                let ux = (u_field(p + mesh_h) - u_field(p - mesh_h)) / (2.0 * mesh_h);
                let uy = (u_field(p + Complex64::new(0.0, mesh_h)) - u_field(p - Complex64::new(0.0, mesh_h)))
                    / (2.0 * mesh_h);
                let a = a_field(p)?;
                row += a.bilinear(grad_psi, [ux, uy]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&rows) * mesh_h * mesh_h)
}

/// Sum in a fixed binary-tree order, independent of thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexfield::distortion_of;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    /// `J diag(k, 1/k) Jᵀ` by explicit matrix products.
    fn product_oracle(k: f64, theta: f64) -> [[f64; 2]; 2] {
        let j = RotationAngle(theta).matrix();
        let d = [[k, 0.0], [0.0, 1.0 / k]];
        let mut jd = [[0.0; 2]; 2];
        let mut out = [[0.0; 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                jd[r][col] = (0..2).map(|m| j[r][m] * d[m][col]).sum();
            }
        }
        for r in 0..2 {
            for col in 0..2 {
                out[r][col] = (0..2).map(|m| jd[r][m] * j[col][m]).sum();
            }
        }
        out
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        assert_eq!(a_mu(c(0.0, 0.0)).unwrap(), SymMatrix2::IDENTITY);
    }

    #[test]
    fn real_coefficient_is_diagonal() {
        let a = a_mu(c(1.0 / 3.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a.a11, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a22, 2.0, epsilon = 1e-15);
        assert_eq!(a.a12, 0.0);
    }

    #[test]
    fn polar_form_coefficient_k2_theta0() {
        let a = a_mu(c(-1.0 / 3.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a.a11, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a22, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a12, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn a_polar_examples() {
        assert_eq!(a_polar(1.0, RotationAngle(0.77)).unwrap().a12, 0.0);
        let a = a_polar(1.0, RotationAngle(0.77)).unwrap();
        assert_abs_diff_eq!(a.a11, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a22, 1.0, epsilon = 1e-15);

        let a = a_polar(2.0, RotationAngle(FRAC_PI_2)).unwrap();
        let o = product_oracle(2.0, FRAC_PI_2);
        assert_abs_diff_eq!(a.a11, o[0][0], epsilon = 1e-15);
        assert_abs_diff_eq!(a.a11, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a22, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a12, 0.0, epsilon = 1e-15);

        let a = a_polar(2.0, RotationAngle(FRAC_PI_4)).unwrap();
        let o = product_oracle(2.0, FRAC_PI_4);
        assert_abs_diff_eq!(a.a11, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a22, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(a.a12, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(o[0][1], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(o[1][0], 0.75, epsilon = 1e-15);

        assert!(matches!(a_polar(0.9, RotationAngle(0.0)), Err(Error::InvalidDistortion { .. })));
    }

    #[test]
    fn boundary_form_examples() {
        assert_abs_diff_eq!(boundary_quadratic(c(0.0, 0.0), 1.3).unwrap(), 1.0, epsilon = 1e-15);
        let alpha = 0.5;
        for t in [0.0, 0.4, 2.0, 5.5] {
            let mu = Complex64::from_polar(-(1.0 - alpha) / (1.0 + alpha), 2.0 * t);
            assert_abs_diff_eq!(boundary_quadratic(mu, t).unwrap(), 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(correction_term(mu, t).unwrap(), 0.0, epsilon = 1e-15);
        }
        let mu = c(0.2, 0.1);
        let lhs = boundary_quadratic(mu, 0.7).unwrap();
        let rhs = distortion_minus_correction(mu, 0.7).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn correction_examples() {
        assert_eq!(correction_term(c(0.0, 0.0), 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(correction_term(c(1.0 / 3.0, 0.0), 0.0).unwrap(), 1.5, epsilon = 1e-15);
        assert!(matches!(correction_term(c(0.6, 0.8), 0.0), Err(Error::NotUniformlyElliptic { .. })));
    }

    #[test]
    fn bump_gradient_matches_finite_differences() {
        let b = Bump::new(c(0.2, -0.1), 0.3).unwrap();
        let p = c(0.31, 0.02);
        let h = 1e-6;
        let gx = (b.value(p + h) - b.value(p - h)) / (2.0 * h);
        let gy = (b.value(p + c(0.0, h)) - b.value(p - c(0.0, h))) / (2.0 * h);
        let g = b.gradient(p);
        assert_abs_diff_eq!(g[0], gx, epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], gy, epsilon = 1e-8);
    }

    #[test]
    fn harmonic_function_has_small_residual() {
        let bump = Bump::new(c(0.0, 0.0), 0.3).unwrap();
        let u = |z: ComplexScalar| z.re * z.re - z.im * z.im;
        let opts = WeakResidualOptions::default();
        let r = weak_residual(|_| Ok(SymMatrix2::IDENTITY), u, &bump, 1.0 / 256.0, &opts).unwrap();
        assert!(r <= 1e-3, "residual {r}");
    }

    #[test]
    fn non_solution_is_detected() {
        // ∫∇(x²)·∇ψ = −∫2ψ = −πR²/2 for ψ = (1 − r²/R²)³.
        let bump = Bump::new(c(0.1, 0.0), 0.3).unwrap();
        let r = weak_residual(|_| Ok(SymMatrix2::IDENTITY), |z: ComplexScalar| z.re * z.re, &bump, 1.0 / 256.0, &WeakResidualOptions::default()).unwrap();
        assert_abs_diff_eq!(r, PI * 0.09 / 2.0, epsilon = 1e-4);
    }

    #[test]
    fn support_must_fit_domain() {
        let bump = Bump::new(c(0.9, 0.0), 0.3).unwrap();
        let r = weak_residual(|_| Ok(SymMatrix2::IDENTITY), |z: ComplexScalar| z.re, &bump, 0.01, &WeakResidualOptions::default());
        assert_eq!(r, Err(Error::SupportOutOfDomain));
    }

    #[test]
    fn pairwise_sum_order_is_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-3).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
        assert_abs_diff_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn unit_determinant_and_spectrum(r in 0.0f64..0.99, phi in 0.0f64..6.3) {
            let mu = Complex64::from_polar(r, phi);
            let a = a_mu(mu).unwrap();
            let k = distortion_of(mu).unwrap();
            // Entries are of size k, so rounding them alone moves det by about eps k^2.
            prop_assert!((a.det() - 1.0).abs() <= 4.0 * f64::EPSILON * k * k);
            prop_assert!(a.is_positive_definite());
            let (l1, l2) = a.eigenvalues();
            prop_assert!((l1 - k).abs() <= 1e-10 * k);
            prop_assert!((l2 - 1.0 / k).abs() <= 1e-10);
        }

        #[test]
        fn polar_form_agrees(k in 1.0f64..50.0, theta in -7.0f64..7.0) {
            let mu = Complex64::from_polar((1.0 - k) / (1.0 + k), 2.0 * theta);
            let a = a_mu(mu).unwrap();
            let b = a_polar(k, RotationAngle(theta)).unwrap();
            prop_assert!((a.a11 - b.a11).abs() <= 1e-12 * k);
            prop_assert!((a.a12 - b.a12).abs() <= 1e-12 * k);
            prop_assert!((a.a22 - b.a22).abs() <= 1e-12 * k);
        }

        #[test]
        fn boundary_form_bounds(r in 0.0f64..0.99, phi in 0.0f64..6.3, t in 0.0f64..6.3) {
            let mu = Complex64::from_polar(r, phi);
            let k = distortion_of(mu).unwrap();
            let q = boundary_quadratic(mu, t).unwrap();
            prop_assert!(q >= 1.0 / k - 1e-12 && q <= k + 1e-12 * k);
            prop_assert!(correction_term(mu, t).unwrap() >= 0.0);
            let sum = q + correction_term(mu, t).unwrap();
            prop_assert!((sum - k).abs() <= 1e-12 * k.max(1.0));
        }
    }
}
