use std::f64::consts::TAU;

use num_complex::Complex64;
use serde_json::json;

use super::config::{BumpConfig, PairConfig, RunConfig};
use super::report::{Check, CsvTable, RunReport};
use super::CliError;
use crate::bound::{
    circle_average, circle_average_matrix_form, ess_sup_circle_averages, estimate_mbar, BoundReport, Circle,
    SearchOutcome,
};
use crate::complexfield::{distortion_of, effective_step, eval_mu, CoefficientSpec, ComplexScalar, Disk, MapSpec};
use crate::elliptic::{a_mu, boundary_quadratic, distortion_minus_correction, weak_residual, WeakResidualOptions};
use crate::error::{Error, Result};
use crate::rng::Lcg64;
use crate::stretchings::{
    beltrami_residual, distance_to_ray, distortion_identity_for, empirical_hoelder, HoelderScheme, SharpExample,
};

/// Mesh sizes of the weak-residual refinement series.
pub const WEAK_MESHES: [f64; 3] = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];

pub struct Outcome {
    pub report: RunReport,
    pub csv: Option<CsvTable>,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Shortest round-trip form, with exponent for very small or large values.
fn fmt(v: f64) -> String {
    // adding zero turns -0 into 0
    match serde_json::Number::from_f64(v + 0.0) {
        Some(n) => n.to_string(),
        None => format!("{v}"),
    }
}

/// Seeded points of the domain at least `0.05 R` from the origin and from the
/// domain boundary and at least `20` effective steps from every ray in `rays`.
fn smooth_points(cfg: &RunConfig, domain: &Disk, rays: &[f64]) -> Result<Vec<ComplexScalar>> {
    let mut rng = Lcg64::new(cfg.seed);
    let r = domain.radius;
    let mut out = Vec::with_capacity(cfg.samples);
    let max_attempts = 1000 * cfg.samples;
    let mut attempts = 0;
    while out.len() < cfg.samples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::DegenerateSample);
        }
        let z = domain.center + rng.polar_point(0.0, 0.95 * r);
        if z.norm() < 0.05 * r {
            continue;
        }
        let band = 20.0 * effective_step(z, cfg.step);
        if rays.iter().any(|phi| distance_to_ray(z, *phi) < band) {
            continue;
        }
        out.push(z);
    }
    Ok(out)
}

fn grid_points(cfg: &RunConfig, extent: ((f64, f64), (f64, f64))) -> Vec<ComplexScalar> {
    let mut rng = Lcg64::new(cfg.seed);
    let ((x0, x1), (y0, y1)) = extent;
    (0..cfg.samples)
        .map(|_| {
            let x = rng.uniform(x0, x1);
            let y = rng.uniform(y0, y1);
            Complex64::new(x, y)
        })
        .collect()
}

struct MapChecks {
    residual_max: f64,
    polar_max: f64,
    form_gap_max: f64,
    distortion_gap_max: f64,
    nonpositive_jacobians: usize,
}

fn map_checks(map: &MapSpec, mu: &CoefficientSpec, points: &[ComplexScalar], step: f64) -> Result<MapChecks> {
    let mut out = MapChecks {
        residual_max: 0.0,
        polar_max: 0.0,
        form_gap_max: 0.0,
        distortion_gap_max: 0.0,
        nonpositive_jacobians: 0,
    };
    for &z in points {
        let r = beltrami_residual(map, mu, z, step)?;
        out.residual_max = out.residual_max.max(r.cartesian);
        out.polar_max = out.polar_max.max(r.polar);
        out.form_gap_max = out.form_gap_max.max((r.cartesian - r.polar).abs());
        let d = distortion_identity_for(map, mu, z, step)?;
        out.distortion_gap_max = out.distortion_gap_max.max(d.relative_gap());
        if !(d.jacobian_det > 0.0) {
            out.nonpositive_jacobians += 1;
        }
    }
    Ok(out)
}

fn push_map_checks(checks: &mut Vec<Check>, m: &MapChecks, cfg: &RunConfig) {
    let t = &cfg.tolerances;
    checks.push(Check::at_most("beltrami_residual_max", m.residual_max, t.residual));
    checks.push(Check::at_most("polar_residual_max", m.polar_max, t.residual));
    checks.push(Check::at_most("residual_form_gap_max", m.form_gap_max, t.polar_agreement));
    checks.push(Check::at_most("distortion_identity_gap_max", m.distortion_gap_max, t.distortion_identity));
    checks.push(Check::at_most("nonpositive_jacobians", m.nonpositive_jacobians as f64, 0.0));
}

pub fn cmd_bound(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    let spec = cfg.coefficient.build().map_err(config_err)?;
    let domain = cfg.domain.build().map_err(config_err)?;
    let outcome = ess_sup_circle_averages(&spec, &domain, &cfg.search, &cfg.quadrature)?;
    let bound = BoundReport::from_search(&spec, &outcome);
    let checks = vec![Check::at_most(
        "sup_minus_max_distortion",
        bound.sup_value - bound.max_distortion,
        cfg.tolerances.sup,
    )];
    let results = serde_json::to_value(&bound).expect("bound report serializes");
    Ok(Outcome {
        report: RunReport::new("bound", cfg.clone(), results, checks),
        csv: Some(circle_table(&outcome)),
    })
}

fn circle_table(outcome: &SearchOutcome) -> CsvTable {
    CsvTable {
        header: vec!["center_x", "center_y", "radius", "average"],
        rows: outcome
            .samples
            .iter()
            .map(|s| vec![fmt(s.circle.center[0]), fmt(s.circle.center[1]), fmt(s.circle.radius), fmt(s.average)])
            .collect(),
    }
}

pub fn cmd_sharp(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    let m = cfg.require_m().map_err(config_err)?;
    let ex = SharpExample::new(m).map_err(config_err)?;
    let domain = cfg.domain.build().map_err(config_err)?;
    let room = domain.radius - domain.center.norm();
    if room <= 0.0 {
        return Err(config_err("the domain must contain the origin"));
    }
    let origin_circle = Circle::new(Complex64::new(0.0, 0.0), 0.5 * room)?;
    let avg = circle_average(ex.mu0(), &origin_circle, &cfg.quadrature)?;
    let avg_matrix = circle_average_matrix_form(ex.mu0(), &origin_circle, &cfg.quadrature)?;

    let points = smooth_points(cfg, &domain, &ex.mu0().discontinuity_angles())?;
    let mc = map_checks(&ex.map(), ex.mu0(), &points, cfg.step)?;

    let outcome = ess_sup_circle_averages(ex.mu0(), &domain, &cfg.search, &cfg.quadrature)?;
    let bound = BoundReport::from_search(ex.mu0(), &outcome);
    let argmax_offset = outcome.argmax.center().norm();

    let t = &cfg.tolerances;
    let mut checks = vec![
        Check::at_most("origin_circle_average_error", (avg.value - ex.c()).abs(), t.circle_average),
        Check::at_most("origin_circle_matrix_form_error", (avg_matrix.value - ex.c()).abs(), t.circle_average),
    ];
    push_map_checks(&mut checks, &mc, cfg);
    checks.push(Check::at_most("sup_minus_c", bound.sup_value - ex.c(), t.sup));
    checks.push(Check::at_most("argmax_center_offset", argmax_offset, cfg.search.origin_tol));

    let results = json!({
        "M": m,
        "c": ex.c(),
        "exponent": 1.0 / ex.c(),
        "origin_circle": origin_circle,
        "origin_circle_average": avg.value,
        "origin_circle_average_matrix_form": avg_matrix.value,
        "sample_points": points.len(),
        "beltrami_residual_max": mc.residual_max,
        "polar_residual_max": mc.polar_max,
        "distortion_identity_gap_max": mc.distortion_gap_max,
        "bound": bound,
    });
    Ok(Outcome {
        report: RunReport::new("sharp", cfg.clone(), results, checks),
        csv: Some(circle_table(&outcome)),
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    let pair_cfg = cfg
        .pair
        .as_ref()
        .ok_or_else(|| config_err("the verify command needs \"pair\""))?;
    let pair = pair_cfg.build().map_err(config_err)?;
    let domain = cfg.domain.build().map_err(config_err)?;
    let t = &cfg.tolerances;
    let mut checks = Vec::new();

    let points = match pair_cfg {
        PairConfig::Grid(g) => grid_points(cfg, g.build().map_err(config_err)?.extent()),
        _ => smooth_points(cfg, &domain, &pair.mu.discontinuity_angles())?,
    };

    // coefficient identities
    let mut rng = Lcg64::new(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let (mut det_max, mut eig_max, mut form_max) = (0.0f64, 0.0f64, 0.0f64);
    for &z in &points {
        let mu = eval_mu(&pair.mu, z)?;
        let a = a_mu(mu)?;
        let k = distortion_of(mu)?;
        let (hi, lo) = a.eigenvalues();
        det_max = det_max.max((a.det() - 1.0).abs());
        eig_max = eig_max.max((hi - k).abs()).max((lo - 1.0 / k).abs());
        let s = rng.uniform(0.0, TAU);
        form_max = form_max.max((boundary_quadratic(mu, s)? - distortion_minus_correction(mu, s)?).abs());
    }
    checks.push(Check::at_most("det_minus_one_max", det_max, t.det));
    checks.push(Check::at_most("eigenvalue_error_max", eig_max, t.eigenvalues));
    checks.push(Check::at_most("boundary_form_gap_max", form_max, t.boundary_form));

    let mut results = json!({
        "pair": pair_cfg,
        "sample_points": points.len(),
        "det_minus_one_max": det_max,
        "eigenvalue_error_max": eig_max,
        "boundary_form_gap_max": form_max,
    });

    if let Some(map) = &pair.map {
        let mc = map_checks(map, &pair.mu, &points, cfg.step)?;
        push_map_checks(&mut checks, &mc, cfg);

        let scheme = HoelderScheme {
            anchor: Complex64::new(0.0, 0.0),
            seed: cfg.seed,
            ..HoelderScheme::default()
        };
        let h = empirical_hoelder(map, &scheme)?;
        let exponent = pair.exponent.expect("maps come with their exponent");
        let hoelder_tol = if pair.sharp.is_some() { t.hoelder_sharp } else { t.hoelder };
        checks.push(Check::at_most("hoelder_slope_error", (h.slope - exponent).abs(), hoelder_tol));

        let bump_cfg = cfg.bump.clone().unwrap_or_else(|| BumpConfig::default_for(&pair));
        let bump = bump_cfg.build().map_err(config_err)?;
        let opts = WeakResidualOptions {
            domain: Some(domain),
            singular_point: pair.mu.singular_at_origin().then(|| Complex64::new(0.0, 0.0)),
        };
        let series = weak_series(map, &pair.mu, &bump, &opts)?;
        let worst_ratio = series.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        let finest = *series.last().expect("nonempty series");
        let ratio_value = if finest <= t.weak_floor { 0.0 } else { worst_ratio };
        checks.push(Check::at_most("weak_residual_ratio_max", ratio_value, t.weak_ratio));

        let obj = results.as_object_mut().expect("object");
        obj.insert("beltrami_residual_max".into(), json!(mc.residual_max));
        obj.insert("polar_residual_max".into(), json!(mc.polar_max));
        obj.insert("distortion_identity_gap_max".into(), json!(mc.distortion_gap_max));
        obj.insert("hoelder_slope".into(), json!(h.slope));
        obj.insert("hoelder_min_local_slope".into(), json!(h.min_local_slope));
        obj.insert("exponent".into(), json!(exponent));
        obj.insert("bump".into(), json!(bump_cfg));
        obj.insert("weak_meshes".into(), json!(WEAK_MESHES));
        obj.insert("weak_residuals".into(), json!(series));
    }
    Ok(Outcome {
        report: RunReport::new("verify", cfg.clone(), results, checks),
        csv: None,
    })
}

/// `|∫⟨A_μ∇u, ∇ψ⟩|` for `u = Re f` on each mesh of [`WEAK_MESHES`].
fn weak_series(
    map: &MapSpec,
    mu: &CoefficientSpec,
    bump: &crate::elliptic::Bump,
    opts: &WeakResidualOptions,
) -> Result<Vec<f64>> {
    WEAK_MESHES
        .iter()
        .map(|&h| weak_residual(|z| a_mu(eval_mu(mu, z)?), |z| map.eval(z).re, bump, h, opts))
        .collect()
}

pub fn cmd_sweep_mbar(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    if cfg.m_grid.is_empty() {
        return Err(config_err("m_grid must not be empty"));
    }
    if let Some(m) = cfg.m_grid.iter().find(|m| !(**m > 1.0 && m.is_finite())) {
        return Err(config_err(format!("M must exceed 1 (got {m})")));
    }
    let domain = cfg.domain.build().map_err(config_err)?;
    let table = estimate_mbar(&cfg.m_grid, &domain, &cfg.search, &cfg.quadrature, cfg.tolerances.sup)?;
    let csv = CsvTable {
        header: vec!["M", "sup_value", "c_M", "gap", "attained_at_origin"],
        rows: table
            .rows
            .iter()
            .map(|r| {
                vec![fmt(r.m), fmt(r.sup_value), fmt(r.c_m), fmt(r.gap), r.attained_at_origin.to_string()]
            })
            .collect(),
    };
    let results = serde_json::to_value(&table).expect("table serializes");
    Ok(Outcome {
        report: RunReport::new("sweep-mbar", cfg.clone(), results, Vec::new()),
        csv: Some(csv),
    })
}

pub fn cmd_export(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    let pair_cfg = match (&cfg.pair, cfg.m) {
        (Some(p), _) => p.clone(),
        (None, Some(m)) => PairConfig::Sharp { m },
        (None, None) => return Err(config_err("the export command needs \"M\" or \"pair\"")),
    };
    let pair = pair_cfg.build().map_err(config_err)?;
    let map = pair
        .map
        .as_ref()
        .ok_or_else(|| config_err("grid pairs carry no map to export"))?;
    let domain = cfg.domain.build().map_err(config_err)?;
    let n = cfg.export.n;
    let side = 2.0 * domain.radius / n as f64;
    let mut rows = Vec::with_capacity(n * n);
    let mut skipped = 0usize;
    for j in 0..n {
        for i in 0..n {
            let z = domain.center
                + Complex64::new(
                    -domain.radius + (i as f64 + 0.5) * side,
                    -domain.radius + (j as f64 + 0.5) * side,
                );
            let Ok(mu) = eval_mu(&pair.mu, z) else {
                skipped += 1;
                continue;
            };
            let k = match &pair.sharp {
                Some(ex) => ex.k0().k(z.arg()),
                None => distortion_of(mu)?,
            };
            let f = map.eval(z);
            rows.push(vec![fmt(z.re), fmt(z.im), fmt(f.re), fmt(f.im), fmt(k), fmt(mu.re), fmt(mu.im)]);
        }
    }
    let results = json!({
        "pair": pair_cfg,
        "n": n,
        "rows": rows.len(),
        "skipped": skipped,
    });
    Ok(Outcome {
        report: RunReport::new("export", cfg.clone(), results, Vec::new()),
        csv: Some(CsvTable {
            header: vec!["x", "y", "re_f", "im_f", "k", "mu_re", "mu_im"],
            rows,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_points_avoid_rays_and_origin() {
        let cfg = RunConfig {
            samples: 200,
            ..RunConfig::default()
        };
        let ex = SharpExample::new(1.2).unwrap();
        let rays = ex.mu0().discontinuity_angles();
        let pts = smooth_points(&cfg, &Disk::unit(), &rays).unwrap();
        assert_eq!(pts.len(), 200);
        for z in pts {
            assert!(z.norm() >= 0.05 && z.norm() < 0.95);
            assert!(rays.iter().all(|p| distance_to_ray(z, *p) >= 20.0 * effective_step(z, cfg.step)));
        }
    }
}
