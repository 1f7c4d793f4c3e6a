//! Cocycle-level characteristic class computations.
//!
//! Modules, bottom-up:
//!
//! * [`invariant_poly`]: exact-rational symmetric functions (power sums, elementary
//!   symmetric polynomials, Todd and Chern character components) and the GL-invariant
//!   multi-trace maps they induce on tuples of matrices.
//! * [`map_dsl`]: a small expression language for holomorphic maps between opens of
//!   `C^n`, with exact symbolic first and second derivatives.
//! * [`forms`]: matrix-valued holomorphic 1-forms `J^{-1} dJ`, their pullbacks, and scalar
//!   `k`-forms obtained by feeding them to invariant maps.
//! * [`simplicial`]: graded complexes, the explicit Dold-Kan labeling of simplices, smart
//!   truncation and total complexes of double complexes.
//! * [`cocycle`]: chart simplices and the Chern-Weil cocycle map producing Dold-Kan labelings.
//! * [`cech_group`]: Čech, bar and mixed differentials on lazily evaluated cochains of
//!   holomorphic forms, the τ invariant of a group action and cohomology witnesses.
//! * [`bm_kernel`]: Bochner-Martinelli kernel evaluation, ∂̄-closedness and reproducing
//!   checks, pullback along charts and diagonal restriction by extrapolation.

pub mod bm_kernel;
pub mod cech_group;
pub mod cocycle;
pub mod error;
pub mod forms;
pub mod invariant_poly;
pub mod linalg;
pub mod map_dsl;
pub mod parallel;
pub mod simplicial;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point of `C^n`.
pub type Point = Vec<Complex64>;
