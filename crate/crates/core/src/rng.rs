//! Seeded 64-bit linear congruential generator used for every random sample
//! point, so that independent implementations can reproduce the same points.
//!
//! Recurrence: `state ← state · 6364136223846793005 + 1442695040888963407
//! (mod 2⁶⁴)`, applied once before each output. A uniform double in `[0, 1)`
//! is `(state >> 11) · 2⁻⁵³`. The initial state is the seed itself.

use std::f64::consts::TAU;

use num_complex::Complex64;

const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
const INCREMENT: u64 = 1_442_695_040_888_963_407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(MULTIPLIER)
            .wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Point with modulus uniform in `[r_min, r_max)` and argument uniform in
    /// `[0, 2π)`; modulus is drawn first.
    pub fn polar_point(&mut self, r_min: f64, r_max: f64) -> Complex64 {
        let r = self.uniform(r_min, r_max);
        let t = self.uniform(0.0, TAU);
        Complex64::from_polar(r, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_outputs_for_seed_zero() {
        let mut g = Lcg64::new(0);
        assert_eq!(g.next_u64(), INCREMENT);
        assert_eq!(
            g.next_u64(),
            INCREMENT.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT)
        );
    }

    #[test]
    fn unit_interval() {
        let mut g = Lcg64::new(42);
        for _ in 0..10_000 {
            let u = g.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = {
            let mut g = Lcg64::new(7);
            (0..16).map(|_| g.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut g = Lcg64::new(7);
            (0..16).map(|_| g.next_u64()).collect()
        };
        assert_eq!(a, b);
    }
}
