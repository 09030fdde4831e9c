//! Hölder-exponent bounds for solutions of planar Beltrami equations
//! `∂̄f = μ ∂f`.
//!
//! The crate is organised bottom-up:
//!
//! * [`complexfield`] – Beltrami coefficients, distortion, mappings and
//!   finite-difference Wirtinger derivatives.
//! * [`elliptic`] – the unit-determinant matrix `A_μ` of the equivalent
//!   divergence-form equation, its boundary quadratic form and a discrete
//!   weak-solution residual.
//! * [`bound`] – circle averages, their supremum over circles inside the
//!   domain and the resulting exponent estimates.
//! * [`stretchings`] – generalized radial stretchings built from an angular
//!   profile, the two-phase sharp example and pointwise identity checks.
//! * [`cli`] – configuration, reports and the command implementations used by
//!   the `beltrami` binary.

pub mod bound;
pub mod cli;
pub mod complexfield;
pub mod elliptic;
pub mod error;
pub mod quadrature;
pub mod rng;
pub mod stretchings;

pub use error::{Error, Result};
pub use num_complex::Complex64;
