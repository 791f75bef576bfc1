//! Explicit chirp-column matrices with the restricted isometry property,
//! their parameter calculus, and desk-scale verification tools.
//!
//! The library builds n x N sensing matrices over a prime modulus p whose
//! columns are normalized quadratic chirps indexed by pairs (a, b) from
//! structured sets A and B. The `params` module carries the full exponent
//! calculus that turns additive-combinatorial constants into a sparsity
//! exponent beating the coherence square-root barrier; `addcomb` measures the
//! combinatorial quantities on concrete sets; `ric` estimates restricted
//! isometry constants directly from Gram spectra.

pub mod addcomb;
pub mod construction;
pub mod eigen;
pub mod matrix;
pub mod modmath;
pub mod params;
pub mod ric;
pub mod rng;

pub use construction::{build_matrix, build_set_a, build_set_b, ChirpMatrix};
pub use matrix::DenseMatrix;
pub use modmath::PrimeModulus;
pub use params::{optimize_m, report_for_m, ParameterReport};
pub use ric::{coherence, ric_exhaustive, ric_sampled, RicEstimate};
