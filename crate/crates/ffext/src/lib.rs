//! Fourier analysis over the affine plane F_q^2 for odd prime powers q.
//!
//! The crate is organized as a stack:
//!
//! * [`field`] — F_{p^k} arithmetic, the additive character through the
//!   trace, the quadratic character, and Gauss sums.
//! * [`fourier`] — functions on the plane under the two measure
//!   conventions (normalized counting measure on the function side,
//!   counting measure on the frequency side), exact transforms,
//!   convolution, and L^p norms.
//! * [`curves`] — bivariate polynomials, their zero sets, line detection,
//!   intersection counts, and character sums along varieties.
//! * [`extension`] / [`ascent`] — surface measures on varieties, the
//!   extension operator, operator-norm ratios and their numerical
//!   maximization, additive energy, and admissibility arithmetic.
//! * [`distance`] — level-set families of a distance polynomial, distance
//!   counting functions in both exact and spectral form, and the
//!   experiment harness for distance-set lower bounds.
//! * [`verify`] — named check suites that bundle the module-level
//!   identities and bounds into machine-readable pass/fail records.
//!
//! Everything is exact in structure (no truncation, no fast-transform
//! approximations); floating point enters only through the complex
//! exponentials, so identities are checked against tight tolerances.

pub mod ascent;
pub mod curves;
pub mod distance;
pub mod extension;
pub mod field;
pub mod fourier;
pub mod verify;

/// Comparison tolerances used across check suites.
///
/// `identity` guards quantities that are equal in exact arithmetic and
/// differ only by floating-point roundoff; `estimate` guards quantities
/// produced by iterative numerics or dual-path evaluations.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub identity: f64,
    pub estimate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-9, estimate: 1e-6 }
    }
}
