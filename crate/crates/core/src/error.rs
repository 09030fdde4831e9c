//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient is undefined at the singular point z = {z}")]
    EvalAtSingularity { z: Complex64 },

    #[error("point {z} lies outside the sampled grid")]
    OutOfDomain { z: Complex64 },

    #[error("coefficient is not uniformly elliptic: |mu| = {value} >= 1")]
    NotUniformlyElliptic { value: f64 },

    #[error("finite-difference stencil around {z} leaves the domain of the map")]
    StencilOutOfDomain { z: Complex64 },

    #[error("distortion k = {k} must be >= 1")]
    InvalidDistortion { k: f64 },

    #[error("invalid angular profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bump support leaves the field domain")]
    SupportOutOfDomain,

    #[error("quadrature did not converge (error estimate {estimate:e}, tolerance {tolerance:e})")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("search budget of {budget} evaluations exceeded; best value so far {best_value}")]
    SearchBudgetExceeded {
        budget: usize,
        best_value: f64,
        best_center: Complex64,
        best_radius: f64,
    },

    #[error("point {z} is {distance:e} from a discontinuity ray; need at least {required:e}")]
    TooCloseToDiscontinuity {
        z: Complex64,
        distance: f64,
        required: f64,
    },

    #[error("degenerate sample: all increments vanish")]
    DegenerateSample,
}

pub type Result<T> = std::result::Result<T, Error>;
