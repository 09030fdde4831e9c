//! Beltrami coefficients, distortion, planar mappings and finite-difference
//! Wirtinger derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stretchings::{AngularProfile, Stretching};

/// Complex scalar used for points, coefficient values and map values.
pub type ComplexScalar = Complex64;

/// Default finite-difference step; scaled by `|z|` when `|z| > 1`.
pub const DEFAULT_STEP: f64 = 1e-5;

fn ensure_finite(z: ComplexScalar) -> Result<ComplexScalar> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::InvalidArgument(format!("non-finite complex value {z}")))
    }
}

/// Unit-modulus `z / z̄ = e^{2i arg z}`.
pub(crate) fn z_over_zbar(z: ComplexScalar) -> ComplexScalar {
    let n2 = z.norm_sqr();
    Complex64::new((z.re * z.re - z.im * z.im) / n2, 2.0 * z.re * z.im / n2)
}

/// Closed disk `{z : |z − center| ≤ radius}`; used as the domain `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: ComplexScalar,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: ComplexScalar, radius: f64) -> Result<Self> {
        ensure_finite(center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    /// Whether the closed disk `|z − c| ≤ r` fits inside with room `margin`.
    pub fn contains_disk(&self, c: ComplexScalar, r: f64, margin: f64) -> bool {
        (c - self.center).norm() + r <= self.radius - margin
    }
}

/// Uniform rectangular lattice of coefficient values with bilinear
/// interpolation. `values[j * nx + i]` sits at `(x_min + i·dx, y_min + j·dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    values: Vec<ComplexScalar>,
}

impl GridField {
    pub fn new(
        (x_min, x_max): (f64, f64),
        (y_min, y_max): (f64, f64),
        nx: usize,
        ny: usize,
        values: Vec<ComplexScalar>,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2x2 nodes".into()));
        }
        if !(x_min < x_max && y_min < y_max) || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("grid extent must be finite and non-empty".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "grid expects {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        for v in &values {
            ensure_finite(*v)?;
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            values,
        })
    }

    /// Samples `f` at every lattice node.
    pub fn sample<F>(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize, f: F) -> Result<Self>
    where
        F: Fn(ComplexScalar) -> Result<ComplexScalar>,
    {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(Self::node_of(x, y, nx, ny, i, j))?);
            }
        }
        Self::new(x, y, nx, ny, values)
    }

    fn node_of(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize, i: usize, j: usize) -> ComplexScalar {
        Complex64::new(
            x.0 + (x.1 - x.0) * i as f64 / (nx - 1) as f64,
            y.0 + (y.1 - y.0) * j as f64 / (ny - 1) as f64,
        )
    }

    pub fn node(&self, i: usize, j: usize) -> ComplexScalar {
        Self::node_of((self.x_min, self.x_max), (self.y_min, self.y_max), self.nx, self.ny, i, j)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        ((self.x_min, self.x_max), (self.y_min, self.y_max))
    }

    pub fn values(&self) -> &[ComplexScalar] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> ComplexScalar {
        self.values[j * self.nx + i]
    }

    pub fn node_max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn contains(&self, z: ComplexScalar) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }

    pub fn interpolate(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        if !self.contains(z) {
            return Err(Error::OutOfDomain { z });
        }
        let fx = (z.re - self.x_min) / (self.x_max - self.x_min) * (self.nx - 1) as f64;
        let fy = (z.im - self.y_min) / (self.y_max - self.y_min) * (self.ny - 1) as f64;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let s = fx - i as f64;
        let t = fy - j as f64;
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        Ok(v00 * ((1.0 - s) * (1.0 - t)) + v10 * (s * (1.0 - t)) + v01 * ((1.0 - s) * t) + v11 * (s * t))
    }
}

/// The variants a [`CoefficientSpec`] can take.
#[derive(Debug, Clone)]
pub enum CoefficientKind {
    Constant(ComplexScalar),
    /// `μ(z) = −(1−α)/(1+α) · z/z̄`.
    RadialStretch { alpha: f64 },
    /// `μ(z) = (1−k(arg z))/(1+k(arg z)) · z/z̄`.
    PolarProfile(AngularProfile),
    GridSampled(GridField),
}

/// A validated Beltrami coefficient with `‖μ‖∞ < 1`.
#[derive(Debug, Clone)]
pub struct CoefficientSpec {
    kind: CoefficientKind,
    sup_norm: f64,
}

impl CoefficientSpec {
    fn checked(kind: CoefficientKind, sup_norm: f64) -> Result<Self> {
        if !(sup_norm < 1.0) {
            return Err(Error::NotUniformlyElliptic { value: sup_norm });
        }
        Ok(Self { kind, sup_norm })
    }

    pub fn constant(mu: ComplexScalar) -> Result<Self> {
        ensure_finite(mu)?;
        Self::checked(CoefficientKind::Constant(mu), mu.norm())
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0)).expect("zero is elliptic")
    }

    pub fn radial_stretch(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "radial stretch exponent must lie in (0, 1), got {alpha}"
            )));
        }
        Self::checked(CoefficientKind::RadialStretch { alpha }, (1.0 - alpha) / (1.0 + alpha))
    }

    pub fn polar_profile(profile: AngularProfile) -> Result<Self> {
        let k = profile.k_max();
        Self::checked(CoefficientKind::PolarProfile(profile), (k - 1.0) / (k + 1.0))
    }

    pub fn grid(grid: GridField) -> Result<Self> {
        let s = grid.node_max_norm();
        Self::checked(CoefficientKind::GridSampled(grid), s)
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    /// `‖μ‖∞`: exact for closed forms, the node maximum for grids.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `‖K_μ‖∞ = (1 + ‖μ‖∞)/(1 − ‖μ‖∞)`.
    pub fn max_distortion(&self) -> f64 {
        match &self.kind {
            CoefficientKind::RadialStretch { alpha } => 1.0 / alpha,
            CoefficientKind::PolarProfile(p) => p.k_max(),
            _ => (1.0 + self.sup_norm) / (1.0 - self.sup_norm),
        }
    }

    /// Whether the coefficient is undefined at the origin.
    pub fn singular_at_origin(&self) -> bool {
        matches!(
            self.kind,
            CoefficientKind::RadialStretch { .. } | CoefficientKind::PolarProfile(_)
        )
    }

    /// Angles of rays from the origin across which `μ` jumps.
    pub fn discontinuity_angles(&self) -> Vec<f64> {
        match &self.kind {
            CoefficientKind::PolarProfile(p) => p.discontinuities(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        eval_mu(self, z)
    }
}

pub fn eval_mu(spec: &CoefficientSpec, z: ComplexScalar) -> Result<ComplexScalar> {
    ensure_finite(z)?;
    match &spec.kind {
        CoefficientKind::Constant(mu) => Ok(*mu),
        CoefficientKind::RadialStretch { alpha } => {
            if z.norm_sqr() == 0.0 {
                return Err(Error::EvalAtSingularity { z });
            }
            Ok(z_over_zbar(z) * (-(1.0 - alpha) / (1.0 + alpha)))
        }
        CoefficientKind::PolarProfile(profile) => {
            if z.norm_sqr() == 0.0 {
                return Err(Error::EvalAtSingularity { z });
            }
            let k = profile.k(z.arg());
            Ok(z_over_zbar(z) * ((1.0 - k) / (1.0 + k)))
        }
        CoefficientKind::GridSampled(grid) => grid.interpolate(z),
    }
}

/// `K_μ = (1 + |μ|)/(1 − |μ|)` from a coefficient value.
pub fn distortion_of(mu: ComplexScalar) -> Result<f64> {
    let m = mu.norm();
    if !(m < 1.0) {
        return Err(Error::NotUniformlyElliptic { value: m });
    }
    Ok((1.0 + m) / (1.0 - m))
}

pub fn distortion(spec: &CoefficientSpec, z: ComplexScalar) -> Result<f64> {
    distortion_of(eval_mu(spec, z)?)
}

pub fn sup_norm(spec: &CoefficientSpec) -> Result<f64> {
    let s = spec.sup_norm();
    if s >= 1.0 {
        return Err(Error::NotUniformlyElliptic { value: s });
    }
    Ok(s)
}

pub type MapFn = Arc<dyn Fn(ComplexScalar) -> ComplexScalar + Send + Sync>;

/// A planar mapping `f`.
#[derive(Clone)]
pub enum MapSpec {
    ClosedForm { name: String, eval: MapFn },
    Stretching(Stretching),
}

impl fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::ClosedForm { name, .. } => f.debug_tuple("ClosedForm").field(name).finish(),
            MapSpec::Stretching(s) => f.debug_tuple("Stretching").field(s).finish(),
        }
    }
}

impl MapSpec {
    pub fn closed_form<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(ComplexScalar) -> ComplexScalar + Send + Sync + 'static,
    {
        MapSpec::ClosedForm {
            name: name.into(),
            eval: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        Self::closed_form("identity", |z| z)
    }

    pub fn conjugate() -> Self {
        Self::closed_form("conjugate", |z: ComplexScalar| z.conj())
    }

    /// `f(z) = |z|^{α−1} z`, extended by `f(0) = 0`.
    pub fn radial_stretch(alpha: f64) -> Self {
        Self::closed_form(format!("radial_stretch({alpha})"), move |z: ComplexScalar| {
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z * r.powf(alpha - 1.0)
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            MapSpec::ClosedForm { name, .. } => name.clone(),
            MapSpec::Stretching(s) => format!("stretching(alpha={})", s.alpha()),
        }
    }

    pub fn eval(&self, z: ComplexScalar) -> ComplexScalar {
        match self {
            MapSpec::ClosedForm { eval, .. } => eval(z),
            MapSpec::Stretching(s) => s.map(z),
        }
    }
}

/// Step actually used at `z`: `h` scaled by `|z|` when `|z| > 1`.
pub fn effective_step(z: ComplexScalar, h: f64) -> f64 {
    h * z.norm().max(1.0)
}

/// `(∂f, ∂̄f)` at `z` by central differences along both axes.
pub fn wirtinger(f: &MapSpec, z: ComplexScalar, h: f64) -> Result<(ComplexScalar, ComplexScalar)> {
    let (fx, fy) = partials(f, z, h)?;
    let i = Complex64::i();
    Ok(((fx - i * fy) * 0.5, (fx + i * fy) * 0.5))
}

/// `(∂ₓf, ∂ᵧf)` at `z` by central differences.
pub fn partials(f: &MapSpec, z: ComplexScalar, h: f64) -> Result<(ComplexScalar, ComplexScalar)> {
    ensure_finite(z)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let h = effective_step(z, h);
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let mut vals = [Complex64::new(0.0, 0.0); 4];
    for (v, p) in vals.iter_mut().zip([z + dx, z - dx, z + dy, z - dy]) {
        *v = f.eval(p);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::StencilOutOfDomain { z });
        }
    }
    let fx = (vals[0] - vals[1]) / (2.0 * h);
    let fy = (vals[2] - vals[3]) / (2.0 * h);
    Ok((fx, fy))
}
