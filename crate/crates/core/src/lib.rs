//! Randomized determinant sieves for k-Dimensional Matching and Exact Cover
//! by k-Sets.
//!
//! The crate decides whether a k-uniform hypergraph has an exact cover by
//! evaluating an inclusion-exclusion sum over `GF(2^m)` at a random point.
//! Each term of the sum is a determinant (Edmonds for partitioned instances,
//! Tutte with loop stratification otherwise), so the whole run uses polynomial
//! space. A "yes" is always correct; a "no" errs with small probability.
//!
//! Modules, bottom up:
//! - [`gf2m`]: binary field arithmetic
//! - [`linalg`]: determinants and Lagrange interpolation
//! - [`hypergraph`]: instances, projections, file format, generator
//! - [`matchweight`]: Edmonds/Tutte matrices and per-X family weights
//! - [`solver`]: the sieve and the kDM / XkC decision procedures
//! - [`params`]: success probabilities, repetition counts, runtime bases
//! - [`oracle`]: exact reference engines for testing

pub mod error;
pub mod gf2m;
pub mod hypergraph;
pub mod linalg;
pub mod matchweight;
pub mod oracle;
pub mod params;
pub mod solver;

pub use error::{Error, Result};
pub use gf2m::{FieldElem, FieldSpec};
pub use hypergraph::{EdgeAssignment, GenSpec, Hypergraph, ProjectedView};
pub use solver::{Answer, Decision, SieveConfig};
