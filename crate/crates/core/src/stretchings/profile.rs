//! 2π-periodic angular distortion profiles `k(θ) ≥ 1`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, GaussLegendre};

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A 2π-periodic function `k(θ) ≥ 1` with known discontinuity angles.
#[derive(Clone)]
pub struct AngularProfile {
    kind: ProfileKind,
    k_max: f64,
    /// `∫_0^{b_i} k` for every breakpoint `b_i`, plus the full-period
    /// integral as the last entry.
    cumulative: Vec<f64>,
}

#[derive(Clone)]
enum ProfileKind {
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Callable {
        k: ProfileFn,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for AngularProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::PiecewiseConstant {
                breakpoints,
                values,
            } => f
                .debug_struct("PiecewiseConstant")
                .field("breakpoints", breakpoints)
                .field("values", values)
                .finish(),
            ProfileKind::Callable { breakpoints, .. } => f
                .debug_struct("Callable")
                .field("breakpoints", breakpoints)
                .field("k_max", &self.k_max)
                .finish(),
        }
    }
}

fn check_breakpoints(breakpoints: &[f64]) -> Result<()> {
    for b in breakpoints {
        if !b.is_finite() || *b < 0.0 || *b >= TAU {
            return Err(Error::InvalidProfile(format!(
                "breakpoint {b} outside [0, 2π)"
            )));
        }
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidProfile(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

impl AngularProfile {
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; the last
    /// value wraps around through `2π` up to `breakpoints[0]`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidProfile(format!(
                "need as many values as breakpoints (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        check_breakpoints(&breakpoints)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 1.0) {
            return Err(Error::InvalidProfile(format!("value {v} is not >= 1")));
        }
        let n = breakpoints.len();
        let last = values[n - 1];
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = last * breakpoints[0];
        cumulative.push(acc);
        for i in 0..n {
            let end = if i + 1 < n { breakpoints[i + 1] } else { TAU };
            acc += values[i] * (end - breakpoints[i]);
            cumulative.push(acc);
        }
        // cumulative[n] is the integral over [0, 2π) with the wrap piece
        // [0, b_0) counted once at the start.
        let k_max = values.iter().cloned().fold(1.0, f64::max);
        Ok(Self {
            kind: ProfileKind::PiecewiseConstant {
                breakpoints,
                values,
            },
            k_max,
            cumulative,
        })
    }

    pub fn constant(k: f64) -> Result<Self> {
        Self::piecewise_constant(vec![0.0], vec![k])
    }

    /// The two-phase profile: `1` on `[0, cπ/2) ∪ [π, π + cπ/2)` and `M`
    /// elsewhere, with `c = 2 / (1 + 1/M)`.
    pub fn two_phase(m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 1.0 {
            return Err(Error::InvalidArgument(format!("M must exceed 1 (got {m})")));
        }
        let c = 2.0 / (1.0 + 1.0 / m);
        let quarter = c * PI / 2.0;
        Self::piecewise_constant(
            vec![0.0, quarter, PI, PI + quarter],
            vec![1.0, m, 1.0, m],
        )
    }

    /// An arbitrary `k`, smooth between the declared breakpoints. `k ≥ 1` and
    /// the maximum are checked on a dense sample.
    pub fn callable(k: ProfileFn, breakpoints: Vec<f64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        const SAMPLES: usize = 8192;
        let mut k_max: f64 = 1.0;
        for i in 0..SAMPLES {
            let v = k(TAU * (i as f64 + 0.5) / SAMPLES as f64);
            if !v.is_finite() || v < 1.0 {
                return Err(Error::InvalidProfile(format!("k = {v} is not >= 1")));
            }
            k_max = k_max.max(v);
        }
        let mut edges = vec![0.0];
        edges.extend(breakpoints.iter().copied().filter(|b| *b > 0.0));
        edges.push(TAU);
        let rule = GaussLegendre::new(16);
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc += integrate_panels(&rule, &[w[0], w[1]], 1e-14 * (w[1] - w[0]), |t| Ok(k(t)))?.value;
            cumulative.push(acc);
        }
        // Re-index so that cumulative[i] = ∫_0^{b_i} and the last entry is the period integral.
        let mut cum = Vec::with_capacity(breakpoints.len() + 1);
        let mut j = 0;
        for b in &breakpoints {
            if *b == 0.0 {
                cum.push(0.0);
            } else {
                cum.push(cumulative[j]);
                j += 1;
            }
        }
        cum.push(*cumulative.last().unwrap());
        Ok(Self {
            kind: ProfileKind::Callable { k, breakpoints },
            k_max,
            cumulative: cum,
        })
    }

    pub fn k(&self, theta: f64) -> f64 {
        let t = normalize_angle(theta);
        match &self.kind {
            ProfileKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let idx = breakpoints.partition_point(|b| *b <= t);
                if idx == 0 {
                    values[values.len() - 1]
                } else {
                    values[idx - 1]
                }
            }
            ProfileKind::Callable { k, .. } => k(t),
        }
    }

    /// Index of the piece containing `θ`; piece `i` starts at breakpoint `i`
    /// and the last piece wraps through `2π`.
    pub fn sector_of(&self, theta: f64) -> usize {
        let bps = self.breakpoints();
        if bps.is_empty() {
            return 0;
        }
        let idx = bps.partition_point(|b| *b <= normalize_angle(theta));
        if idx == 0 {
            bps.len() - 1
        } else {
            idx - 1
        }
    }

    /// `k(θ)` evaluated as if `θ` lay in piece `sector`: angles that rounding
    /// pushed just across a breakpoint are snapped back into the piece.
    pub fn k_in_sector(&self, theta: f64, sector: usize) -> f64 {
        match &self.kind {
            ProfileKind::PiecewiseConstant { values, .. } => values[sector],
            ProfileKind::Callable { k, breakpoints } => {
                if breakpoints.is_empty() {
                    return k(theta);
                }
                let t = normalize_angle(theta);
                let n = breakpoints.len();
                let lo = breakpoints[sector];
                let hi = if sector + 1 < n { breakpoints[sector + 1] } else { breakpoints[0] + TAU };
                // lift t into [lo, lo + 2π) and snap to the nearer end if outside [lo, hi)
                let lifted = if t < lo { t + TAU } else { t };
                let inside = if lifted < hi {
                    lifted
                } else if lifted - hi < lo + TAU - lifted {
                    hi - (hi - lo) * 1e-12
                } else {
                    lo
                };
                k(normalize_angle(inside))
            }
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        match &self.kind {
            ProfileKind::PiecewiseConstant { breakpoints, .. } => breakpoints,
            ProfileKind::Callable { breakpoints, .. } => breakpoints,
        }
    }

    /// Angles where `k` actually jumps. For piecewise-constant profiles a
    /// breakpoint between equal values is not a discontinuity; declared
    /// breakpoints of a callable profile always are.
    pub fn discontinuities(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let n = values.len();
                (0..n)
                    .filter(|&i| values[i] != values[(i + n - 1) % n])
                    .map(|i| breakpoints[i])
                    .collect()
            }
            ProfileKind::Callable { breakpoints, .. } => breakpoints.clone(),
        }
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::PiecewiseConstant { .. })
    }

    /// `∫_0^{2π} k(θ) dθ`.
    pub fn period_integral(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// `∫_0^θ k` for `θ ∈ [0, 2π)`; other angles are reduced first.
    pub fn integral_to(&self, theta: f64) -> f64 {
        let t = normalize_angle(theta);
        let bps = self.breakpoints();
        let idx = bps.partition_point(|b| *b <= t);
        match &self.kind {
            ProfileKind::PiecewiseConstant { values, .. } => {
                if idx == 0 {
                    values[values.len() - 1] * t
                } else {
                    self.cumulative[idx - 1] + values[idx - 1] * (t - bps[idx - 1])
                }
            }
            ProfileKind::Callable { k, .. } => {
                let (start, base) = if idx == 0 {
                    (0.0, 0.0)
                } else {
                    (bps[idx - 1], self.cumulative[idx - 1])
                };
                if t <= start {
                    return base;
                }
                let rule = GaussLegendre::new(16);
                let part = integrate_panels(&rule, &[start, t], 1e-14 * (t - start), |s| Ok(k(s)))
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN);
                base + part
            }
        }
    }

    /// Distance from `z` to the nearest discontinuity ray `{s e^{iφ}, s ≥ 0}`.
    pub fn distance_to_rays(&self, z: num_complex::Complex64) -> f64 {
        self.discontinuities()
            .into_iter()
            .map(|phi| distance_to_ray(z, phi))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn distance_to_ray(z: num_complex::Complex64, phi: f64) -> f64 {
    let dir = num_complex::Complex64::from_polar(1.0, phi);
    let along = z.re * dir.re + z.im * dir.im;
    if along <= 0.0 {
        z.norm()
    } else {
        (z.re * dir.im - z.im * dir.re).abs()
    }
}
