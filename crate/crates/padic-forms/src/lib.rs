//! Exact classification of independent linear forms over the p-adic
//! numbers, with constructive certification on finite cyclic models.
//!
//! Given three linear forms `L_i = a_i x1 + b_i x2 + c_i x3` with nonzero
//! p-adic coefficients, the crate decides which of three regimes the
//! coefficient matrix falls into when the forms are required to be
//! independent random variables:
//!
//! * every admissible distribution triple is idempotent (a shifted Haar
//!   measure on a compact subgroup),
//! * every admissible triple is degenerate (point masses), or
//! * a non-idempotent admissible triple exists, in which case an explicit
//!   certificate is constructed and machine-checked on a finite model
//!   `Z/p^n` by exact rational arithmetic.
//!
//! Modules follow the pipeline: [`padic`] (exact scalars) -> [`forms`]
//! (canonical shapes, determinant) -> [`classifier`] (the decision tree) ->
//! [`finite`] / [`verifier`] (finite models and exact independence checks)
//! -> [`witness`] (certificate construction) -> [`sweep`] (grid runs) ->
//! [`cli`].
//!
//! The heavy loops (independence checks, grid sweeps) are data parallel and
//! run under rayon when the default `parallel` feature is enabled; disabling
//! it yields a dependency-free sequential build with identical results.

pub mod classifier;
pub mod cli;
pub mod finite;
pub mod forms;
pub mod padic;
pub(crate) mod parallel;
pub mod sweep;
pub mod verifier;
pub mod witness;
