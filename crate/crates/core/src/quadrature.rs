//! Gauss–Legendre rules and adaptive composite integration over panels.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration from the Tricomi initial guess; the weights are
//! `2 / ((1 - x²) P_n'(x)²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Deepest bisection level tried on a single panel before giving up.
pub const MAX_DEPTH: u32 = 52;

/// Cap on integrand evaluations for one call of [`integrate_panels`], so that a
/// noisy integrand fails instead of bisecting without end.
pub const MAX_EVALUATIONS: usize = 1 << 21;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x)?;
        }
        Ok(half * sum)
    }
}

/// `(P_n(x), P_n'(x))` from the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Adaptive composite Gauss–Legendre integration over consecutive panels.
///
/// `breaks` must be sorted; each interval between consecutive entries is
/// integrated separately and bisected until the whole-vs-halves difference is
/// below `abs_tol * panel_length / total_length`.
pub fn integrate_panels<F>(rule: &GaussLegendre, breaks: &[f64], abs_tol: f64, mut f: F) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument(
            "at least two break points are required".into(),
        ));
    }
    let total_len = breaks[breaks.len() - 1] - breaks[0];
    let mut out = Integral {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let tol = abs_tol * (b - a) / total_len;
        let coarse = rule.integrate(a, b, &mut f)?;
        out.evaluations += rule.len();
        let part = adapt(rule, a, b, coarse, tol, 0, &mut f, &mut out.evaluations)?;
        out.value += part.0;
        out.error_estimate += part.1;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    f: &mut F,
    evaluations: &mut usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, &mut *f)?;
    let right = rule.integrate(m, b, &mut *f)?;
    *evaluations += 2 * rule.len();
    let refined = left + right;
    let err = (refined - whole).abs();
    if *evaluations > MAX_EVALUATIONS {
        return Err(Error::QuadratureNotConverged {
            estimate: err,
            tolerance: tol,
        });
    }
    // Below ~4 ulp of the panel value the comparison carries no information.
    let floor = 4.0 * f64::EPSILON * refined.abs().max(whole.abs());
    if err <= tol || err <= floor {
        return Ok((refined, err));
    }
    if depth >= MAX_DEPTH || m <= a || m >= b {
        return Err(Error::QuadratureNotConverged {
            estimate: err,
            tolerance: tol,
        });
    }
    let l = adapt(rule, a, m, left, 0.5 * tol, depth + 1, f, evaluations)?;
    let r = adapt(rule, m, b, right, 0.5 * tol, depth + 1, f, evaluations)?;
    Ok((l.0 + r.0, l.1 + r.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33, 64] {
            let rule = GaussLegendre::new(n);
            assert_abs_diff_eq!(rule.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(8);
        // ∫_0^1 x^15 = 1/16
        let v = rule.integrate(0.0, 1.0, |x| Ok(x.powi(15))).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn three_point_nodes() {
        let rule = GaussLegendre::new(3);
        assert_abs_diff_eq!(rule.nodes()[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn panels_handle_a_step_function() {
        let rule = GaussLegendre::new(16);
        let r = integrate_panels(&rule, &[0.0, 1.0, 3.0], 1e-12, |x| {
            Ok(if x < 1.0 { 2.0 } else { 5.0 })
        })
        .unwrap();
        assert_abs_diff_eq!(r.value, 12.0, epsilon = 1e-13);
    }

    #[test]
    fn adaptive_resolves_a_sharp_peak() {
        let rule = GaussLegendre::new(16);
        let eps = 1e-4;
        // ∫_{-1}^{1} eps / (x² + eps²) = 2 atan(1/eps)
        let r = integrate_panels(&rule, &[-1.0, 1.0], 1e-10, |x| Ok(eps / (x * x + eps * eps))).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 * (1.0 / eps).atan(), epsilon = 1e-9);
    }

    #[test]
    fn undeclared_jump_reports_non_convergence_or_converges() {
        let rule = GaussLegendre::new(16);
        let r = integrate_panels(&rule, &[0.0, 1.0], 1e-12, |x| Ok(if x < 1.0 / 3.0 { 0.0 } else { 1.0 }));
        match r {
            Ok(v) => assert_abs_diff_eq!(v.value, 2.0 / 3.0, epsilon = 1e-11),
            Err(e) => assert!(matches!(e, Error::QuadratureNotConverged { .. })),
        }
    }

    #[test]
    fn noise_fails_instead_of_hanging() {
        let rule = GaussLegendre::new(16);
        let mut state = 1u64;
        let r = integrate_panels(&rule, &[0.0, 1.0], 1e-14, |_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            Ok(1.0 + 1e-6 * (state >> 11) as f64 / (1u64 << 53) as f64)
        });
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }
}
