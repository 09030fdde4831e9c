//! JSON configuration of a run.
//!
//! Every key is optional except the ones a command needs (`M` for `sharp`,
//! `m_grid` for `sweep-mbar`); unknown keys are rejected.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bound::{QuadratureOptions, SearchOptions};
use crate::complexfield::{CoefficientSpec, Disk, GridField, MapSpec};
use crate::elliptic::Bump;
use crate::error::{Error, Result};
use crate::stretchings::{AngularProfile, SharpExample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bound,
    Sharp,
    Verify,
    SweepMbar,
    Export,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Sharp => "sharp",
            Command::Verify => "verify",
            Command::SweepMbar => "sweep-mbar",
            Command::Export => "export",
        }
    }
}

/// `{"profile": "k0", "M": 1.2}`, `{"profile": "piecewise", "breakpoints": [..], "values": [..]}`
/// or `{"profile": "constant", "k": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    K0 {
        #[serde(rename = "M")]
        m: f64,
    },
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    Constant { k: f64 },
}

impl ProfileConfig {
    pub fn build(&self) -> Result<AngularProfile> {
        match self {
            ProfileConfig::K0 { m } => {
                if !(*m > 1.0) {
                    return Err(Error::InvalidArgument(format!("M must exceed 1 (got {m})")));
                }
                AngularProfile::two_phase(*m)
            }
            ProfileConfig::Piecewise { breakpoints, values } => {
                AngularProfile::piecewise_constant(breakpoints.clone(), values.clone())
            }
            ProfileConfig::Constant { k } => AngularProfile::constant(*k),
        }
    }
}

/// Row-major samples `re[j·nx + i] + i·im[j·nx + i]` at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridField> {
        if self.re.len() != self.im.len() {
            return Err(Error::InvalidArgument(format!(
                "grid re/im lengths differ ({} vs {})",
                self.re.len(),
                self.im.len()
            )));
        }
        let values = self.re.iter().zip(&self.im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        GridField::new((self.x[0], self.x[1]), (self.y[0], self.y[1]), self.nx, self.ny, values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Constant {
        #[serde(default)]
        re: f64,
        #[serde(default)]
        im: f64,
    },
    RadialStretch {
        alpha: f64,
    },
    PolarProfile(ProfileConfig),
    Grid(GridConfig),
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig::Constant { re: 0.0, im: 0.0 }
    }
}

impl CoefficientConfig {
    pub fn build(&self) -> Result<CoefficientSpec> {
        match self {
            CoefficientConfig::Constant { re, im } => CoefficientSpec::constant(Complex64::new(*re, *im)),
            CoefficientConfig::RadialStretch { alpha } => CoefficientSpec::radial_stretch(*alpha),
            CoefficientConfig::PolarProfile(p) => CoefficientSpec::polar_profile(p.build()?),
            CoefficientConfig::Grid(g) => CoefficientSpec::grid(g.build()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<Disk> {
        Disk::new(Complex64::new(self.center[0], self.center[1]), self.radius)
    }
}

/// A map together with the coefficient it should satisfy the Beltrami equation for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairConfig {
    /// `f(z) = |z|^{α−1} z` with its radial coefficient.
    RadialStretch { alpha: f64 },
    /// `(f₀, μ₀)` for the given `M`.
    Sharp {
        #[serde(rename = "M")]
        m: f64,
    },
    /// `f(z) = z`, `μ ≡ 0`.
    Identity,
    /// A sampled coefficient without a map; only coefficient identities are checked.
    Grid(GridConfig),
}

/// A built pair: the map is absent for grid data.
pub struct Pair {
    pub map: Option<MapSpec>,
    pub mu: CoefficientSpec,
    pub sharp: Option<SharpExample>,
    /// Exponent of the map's modulus, when known in closed form.
    pub exponent: Option<f64>,
}

impl PairConfig {
    pub fn build(&self) -> Result<Pair> {
        match self {
            PairConfig::RadialStretch { alpha } => Ok(Pair {
                map: Some(MapSpec::radial_stretch(*alpha)),
                mu: CoefficientSpec::radial_stretch(*alpha)?,
                sharp: None,
                exponent: Some(*alpha),
            }),
            PairConfig::Sharp { m } => {
                let ex = SharpExample::new(*m)?;
                Ok(Pair {
                    map: Some(ex.map()),
                    mu: ex.mu0().clone(),
                    exponent: Some(1.0 / ex.c()),
                    sharp: Some(ex),
                })
            }
            PairConfig::Identity => Ok(Pair {
                map: Some(MapSpec::identity()),
                mu: CoefficientSpec::zero(),
                sharp: None,
                exponent: Some(1.0),
            }),
            PairConfig::Grid(g) => Ok(Pair {
                map: None,
                mu: CoefficientSpec::grid(g.build()?)?,
                sharp: None,
                exponent: None,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

impl BumpConfig {
    pub fn build(&self) -> Result<Bump> {
        Bump::new(Complex64::new(self.center[0], self.center[1]), self.radius)
    }

    /// Radius 0.3 at distance 0.5 from the origin: on the first jump ray
    /// `arg z = cπ/2` for the sharp example, at `arg z = 1` otherwise.
    pub fn default_for(pair: &Pair) -> Self {
        let angle = pair.sharp.as_ref().map_or(1.0, |s| s.c() * PI / 2.0);
        let p = Complex64::from_polar(0.5, angle);
        Self {
            center: [p.re, p.im],
            radius: 0.3,
        }
    }
}

/// Check tolerances; every report echoes the values used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative Beltrami residual `|∂̄f − μ∂f| / |∂f|`.
    pub residual: f64,
    /// Cartesian versus polar residual.
    pub polar_agreement: f64,
    /// Relative gap in `|Df|² = K J_f`.
    pub distortion_identity: f64,
    pub det: f64,
    pub eigenvalues: f64,
    /// Matrix form versus distortion form of `⟨n, A_μ n⟩`.
    pub boundary_form: f64,
    /// Origin-centered circle average versus `c(M)`.
    pub circle_average: f64,
    /// Slack in `sup ≤ c(M)` (sharp, sweep-mbar) and `sup ≤ ‖K‖∞` (bound).
    pub sup: f64,
    /// Empirical Hölder slope versus the closed-form exponent.
    pub hoelder: f64,
    /// Same, for the sharp example.
    pub hoelder_sharp: f64,
    /// Largest admissible ratio of successive weak residuals.
    pub weak_ratio: f64,
    /// A weak-residual series whose finest value is below this passes outright.
    pub weak_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            polar_agreement: 1e-6,
            distortion_identity: 1e-5,
            det: 1e-12,
            eigenvalues: 1e-10,
            boundary_form: 1e-12,
            circle_average: 1e-8,
            sup: 1e-4,
            hoelder: 1e-6,
            hoelder_sharp: 0.02,
            weak_ratio: 0.7,
            weak_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    /// Cell-centred `n × n` grid over the domain's bounding square.
    pub n: usize,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub coefficient: CoefficientConfig,
    pub domain: DomainConfig,
    pub search: SearchOptions,
    pub quadrature: QuadratureOptions,
    pub tolerances: Tolerances,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub m_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpConfig>,
    /// Random sample points per check.
    pub samples: usize,
    pub seed: u64,
    /// Finite-difference step.
    pub step: f64,
    pub export: ExportConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            coefficient: CoefficientConfig::default(),
            domain: DomainConfig::default(),
            search: SearchOptions::default(),
            quadrature: QuadratureOptions::default(),
            tolerances: Tolerances::default(),
            m: None,
            m_grid: Vec::new(),
            pair: None,
            bump: None,
            samples: 1000,
            seed: 0,
            step: crate::complexfield::DEFAULT_STEP,
            export: ExportConfig::default(),
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The `M` of a `sharp` run.
    pub fn require_m(&self) -> Result<f64> {
        let m = self
            .m
            .ok_or_else(|| Error::InvalidArgument("the sharp command needs \"M\"".into()))?;
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("M must exceed 1 (got {m})")));
        }
        Ok(m)
    }

    pub fn validate_common(&self) -> Result<()> {
        self.search.validate()?;
        self.quadrature.validate()?;
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if self.export.n == 0 {
            return Err(Error::InvalidArgument("export.n must be positive".into()));
        }
        Ok(())
    }
}

