//! Certified two-sided brackets for the Hausdorff dimension of conformal
//! iterated-function-system attractors.
//!
//! The attractor of a family of contractions carries a transfer operator
//! whose spectral radius, as a function of the exponent `s`, crosses 1
//! exactly at the Hausdorff dimension. This crate discretizes that operator
//! by collocation on a mesh and produces a pair of nonnegative matrices
//! `A_s <= B_s` whose spectral radii bracket the operator's. Collatz-Wielandt
//! ratios of a positive test vector then certify `r(A_s) >= 1` (dimension at
//! least `s`) or `r(B_s) <= 1` (dimension at most `s`) using only finitely
//! many floating-point comparisons, and a root search over `s` tightens the
//! two certified endpoints toward each other.
//!
//! Supported problem families:
//!
//! * continued-fraction sets with a finite digit alphabet on `[0, 1]`,
//! * a one-parameter nonlinear perturbation of the middle-thirds Cantor set,
//! * complex continued fractions with Gaussian-integer digits on the
//!   half-disk `|z - 1/2| <= 1/2`, including infinite digit sets handled
//!   through a truncation radius and a certified tail correction.
//!
//! The top-level entry point is [`solver::find_bracket`]; the modules below
//! it expose each stage (maps, derivative bounds, meshes, matrix assembly,
//! spectral certificates) for direct use and for testing.

// Validation guards are written as negated comparisons so that NaN fails
// them together with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Frozen reference constants keep every printed digit of their source.
#![allow(clippy::excessive_precision)]

pub mod bounds;
pub mod collocation;
pub mod maps;
pub mod mesh;
pub mod solver;
pub mod spectral;

pub use bounds::{BoundProfile1D, BoundProfile2D, EpsilonSeries};
pub use collocation::{AssembleOptions, BracketMatrices, SparseNonnegMatrix};
pub use maps::{ContractionMap1D, DigitSetKind, DigitSetSpec, IfsProblem, MoebiusMap2D};
pub use mesh::{Mesh1D, Mesh2D};
pub use solver::{find_bracket, DimensionBracket, MeshParams, Side, SolveOptions};
pub use spectral::SpectralResult;
