//! Supremum of circle averages over circles inside a disk domain: a coarse
//! polar grid of centers and radii followed by compass-search refinement.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circle::{circle_average_with, Circle, IntegrandForm, QuadratureOptions};
use crate::complexfield::{CoefficientSpec, Disk};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchOptions {
    /// Number of center moduli `i/n · R`, `i = 0..n`.
    pub center_radial: usize,
    /// Number of center arguments per nonzero modulus.
    pub center_angular: usize,
    /// Radii per center, as fractions `l/n` of the largest admissible radius.
    pub radii: usize,
    pub refine_steps: usize,
    pub shrink: f64,
    /// Circles must satisfy `|x − x_Ω| + ρ ≤ R_Ω − margin`.
    pub margin: f64,
    /// Cap on circle-average evaluations; `None` is unlimited.
    pub max_evaluations: Option<usize>,
    /// A refinement move is taken only if it gains more than this.
    pub improvement_tol: f64,
    /// Centers closer than this to the domain center count as centered.
    pub origin_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            center_radial: 41,
            center_angular: 41,
            radii: 24,
            refine_steps: 60,
            shrink: 0.5,
            margin: 1e-9,
            max_evaluations: None,
            improvement_tol: 1e-14,
            origin_tol: 1e-6,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.center_radial < 1 || self.center_angular < 1 || self.radii < 1 {
            return Err(Error::InvalidArgument("search grid dimensions must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidArgument(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if !(self.margin >= 0.0) || !(self.improvement_tol >= 0.0) || !(self.origin_tol >= 0.0) {
            return Err(Error::InvalidArgument("margins and tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// One evaluated circle of the coarse grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSample {
    pub circle: Circle,
    pub average: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub coarse_circles: usize,
    /// Circles dropped because the average could not be computed
    /// (through the singular point or unconverged quadrature).
    pub skipped_circles: usize,
    pub coarse_best: f64,
    pub refine_steps: usize,
    pub refine_moves: usize,
    pub refinement_gain: f64,
    pub evaluations: usize,
    pub max_quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub sup_value: f64,
    pub argmax: Circle,
    pub argmax_error: f64,
    pub attained_at_center: bool,
    pub diagnostics: SearchDiagnostics,
    pub samples: Vec<CircleSample>,
}

/// Orders samples by `(value, center.re, center.im, radius)`.
fn rank(a: &CircleSample, b: &CircleSample) -> Ordering {
    a.average
        .total_cmp(&b.average)
        .then(a.circle.center[0].total_cmp(&b.circle.center[0]))
        .then(a.circle.center[1].total_cmp(&b.circle.center[1]))
        .then(a.circle.radius.total_cmp(&b.circle.radius))
}

fn coarse_grid(domain: &Disk, opts: &SearchOptions) -> Vec<Circle> {
    let mut centers = vec![domain.center];
    for i in 1..opts.center_radial {
        let r = domain.radius * i as f64 / opts.center_radial as f64;
        for j in 0..opts.center_angular {
            let a = TAU * j as f64 / opts.center_angular as f64;
            centers.push(domain.center + Complex64::from_polar(r, a));
        }
    }
    let mut circles = Vec::with_capacity(centers.len() * opts.radii);
    for x in centers {
        let room = domain.radius - opts.margin - (x - domain.center).norm();
        if room <= 0.0 {
            continue;
        }
        for l in 1..=opts.radii {
            let rho = room * l as f64 / opts.radii as f64;
            circles.push(Circle {
                center: [x.re, x.im],
                radius: rho,
            });
        }
    }
    circles
}

struct Evaluator<'a> {
    spec: &'a CoefficientSpec,
    quad: &'a QuadratureOptions,
    rule: GaussLegendre,
}

impl Evaluator<'_> {
    fn eval(&self, circle: &Circle) -> Option<CircleSample> {
        circle_average_with(self.spec, circle, self.quad, &self.rule, IntegrandForm::Distortion)
            .ok()
            .map(|a| CircleSample {
                circle: *circle,
                average: a.value,
                error_estimate: a.error_estimate,
            })
    }
}

pub fn ess_sup_circle_averages(
    spec: &CoefficientSpec,
    domain: &Disk,
    search: &SearchOptions,
    quad: &QuadratureOptions,
) -> Result<SearchOutcome> {
    search.validate()?;
    quad.validate()?;
    let ev = Evaluator {
        spec,
        quad,
        rule: GaussLegendre::new(quad.base_nodes),
    };

    let grid = coarse_grid(domain, search);
    if let Some(budget) = search.max_evaluations {
        if grid.len() > budget {
            return Err(Error::SearchBudgetExceeded {
                budget,
                best_value: f64::NAN,
                best_center: domain.center,
                best_radius: f64::NAN,
            });
        }
    }
    let evaluated: Vec<Option<CircleSample>> = grid.par_iter().map(|c| ev.eval(c)).collect();
    let coarse_circles = grid.len();
    let samples: Vec<CircleSample> = evaluated.into_iter().flatten().collect();
    let skipped = coarse_circles - samples.len();
    let mut best = *samples
        .iter()
        .max_by(|a, b| rank(a, b))
        .ok_or_else(|| Error::InvalidArgument("no admissible circle in the domain".into()))?;
    let coarse_best = best.average;
    let mut evaluations = coarse_circles;
    let mut max_err = samples.iter().map(|s| s.error_estimate).fold(0.0, f64::max);

    let admissible = |c: &Circle| c.radius > 0.0 && domain.contains_disk(c.center(), c.radius, search.margin);
    let mut step_c = domain.radius / search.center_radial as f64;
    let mut step_r = domain.radius / search.radii as f64;
    let mut moves = 0;
    for _ in 0..search.refine_steps {
        let [x, y] = best.circle.center;
        let rho = best.circle.radius;
        let candidates = [
            (x + step_c, y, rho),
            (x - step_c, y, rho),
            (x, y + step_c, rho),
            (x, y - step_c, rho),
            (x, y, rho + step_r),
            (x, y, rho - step_r),
        ];
        let mut round_best: Option<CircleSample> = None;
        for (cx, cy, r) in candidates {
            let circle = Circle {
                center: [cx, cy],
                radius: r,
            };
            if !admissible(&circle) {
                continue;
            }
            evaluations += 1;
            if let Some(budget) = search.max_evaluations {
                if evaluations > budget {
                    return Err(Error::SearchBudgetExceeded {
                        budget,
                        best_value: best.average,
                        best_center: best.circle.center(),
                        best_radius: best.circle.radius,
                    });
                }
            }
            if let Some(s) = ev.eval(&circle) {
                max_err = max_err.max(s.error_estimate);
                if round_best.as_ref().map_or(true, |b| rank(&s, b) == Ordering::Greater) {
                    round_best = Some(s);
                }
            }
        }
        match round_best {
            Some(s) if s.average > best.average + search.improvement_tol => {
                best = s;
                moves += 1;
            }
            _ => {
                step_c *= search.shrink;
                step_r *= search.shrink;
            }
        }
    }

    Ok(SearchOutcome {
        sup_value: best.average,
        argmax: best.circle,
        argmax_error: best.error_estimate,
        attained_at_center: (best.circle.center() - domain.center).norm() <= search.origin_tol,
        diagnostics: SearchDiagnostics {
            coarse_circles,
            skipped_circles: skipped,
            coarse_best,
            refine_steps: search.refine_steps,
            refine_moves: moves,
            refinement_gain: best.average - coarse_best,
            evaluations,
            max_quadrature_error: max_err,
        },
        samples,
    })
}
