//! Hölder-exponent bounds from circle averages.
//!
//! For a coefficient `μ` on a domain `Ω` the improved estimate is
//! `α ≥ 1 / sup_{S_ρ(x) ⊂ Ω} ⨍_{S_ρ(x)} ⟨n, A_μ n⟩`, while the classical one is
//! `α ≥ 1 / ‖K_μ‖∞`. Since `⟨n, A_μ n⟩ ≤ K_μ` pointwise the former is never
//! worse.

mod circle;
mod search;

use serde::{Deserialize, Serialize};

pub use circle::{
    circle_average, circle_average_matrix_form, ray_crossings, Circle, CircleAverage, IntegrandForm,
    QuadratureOptions,
};
pub use search::{ess_sup_circle_averages, CircleSample, SearchDiagnostics, SearchOptions, SearchOutcome};

use crate::complexfield::{CoefficientSpec, Disk};
use crate::error::Result;
use crate::stretchings::{AngularProfile, SharpExample};

pub const SEARCH_DISCLAIMER: &str = "sup_value is the largest circle average found by grid search and \
local refinement; it is a lower estimate of the true supremum, so alpha_new is an upper estimate of \
the guaranteed exponent bound";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha_new: f64,
    pub alpha_classical: f64,
    pub sup_value: f64,
    /// `‖K_μ‖∞`.
    pub max_distortion: f64,
    pub argmax_circle: Circle,
    pub attained_at_center: bool,
    pub diagnostics: SearchDiagnostics,
    pub disclaimer: String,
}

impl BoundReport {
    pub fn from_search(spec: &CoefficientSpec, outcome: &SearchOutcome) -> Self {
        let k = spec.max_distortion();
        Self {
            alpha_new: 1.0 / outcome.sup_value,
            alpha_classical: 1.0 / k,
            sup_value: outcome.sup_value,
            max_distortion: k,
            argmax_circle: outcome.argmax,
            attained_at_center: outcome.attained_at_center,
            diagnostics: outcome.diagnostics.clone(),
            disclaimer: SEARCH_DISCLAIMER.to_string(),
        }
    }
}

pub fn alpha_bounds(
    spec: &CoefficientSpec,
    domain: &Disk,
    search: &SearchOptions,
    quad: &QuadratureOptions,
) -> Result<BoundReport> {
    let outcome = ess_sup_circle_averages(spec, domain, search, quad)?;
    Ok(BoundReport::from_search(spec, &outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbarRow {
    #[serde(rename = "M")]
    pub m: f64,
    pub sup_value: f64,
    pub c_m: f64,
    /// `sup_value − c(M)`.
    pub gap: f64,
    pub attained_at_origin: bool,
    /// `sup_value ≤ c(M) + tol`.
    pub flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbarTable {
    pub rows: Vec<MbarRow>,
    /// Largest grid value of `M` whose flag holds.
    pub mbar_estimate: Option<f64>,
    pub tolerance: f64,
}

/// Runs the circle-average search for the two-phase coefficient at every `M`.
pub fn estimate_mbar(
    m_grid: &[f64],
    domain: &Disk,
    search: &SearchOptions,
    quad: &QuadratureOptions,
    tol: f64,
) -> Result<MbarTable> {
    let mut rows = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let ex = SharpExample::new(m)?;
        let spec = CoefficientSpec::polar_profile(AngularProfile::two_phase(m)?)?;
        let out = ess_sup_circle_averages(&spec, domain, search, quad)?;
        let c = ex.c();
        rows.push(MbarRow {
            m,
            sup_value: out.sup_value,
            c_m: c,
            gap: out.sup_value - c,
            attained_at_origin: out.attained_at_center,
            flag: out.sup_value <= c + tol,
        });
    }
    let mbar_estimate = rows.iter().filter(|r| r.flag).map(|r| r.m).fold(None, |acc: Option<f64>, m| {
        Some(acc.map_or(m, |a| a.max(m)))
    });
    Ok(MbarTable {
        rows,
        mbar_estimate,
        tolerance: tol,
    })
}
