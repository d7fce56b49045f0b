//! Self-adjoint extensions of `-i d/dx` on a finite union of intervals.
//!
//! A union `Omega = ∪ (alpha_i, beta_i)` together with a unitary boundary
//! matrix `B` (`B f(alpha) = f(beta)`) determines an operator `D_B` with
//! discrete spectrum and a unitary group `U(t)`. This crate computes the
//! spectrum, evolves piecewise exponential polynomials exactly along
//! admissible paths, and tests whether `(Omega, B)` is spectral.
//!
//! ```
//! use spectral_intervals::{BoundaryMatrix, IntervalUnion, ScanOptions, spectrum::spectrum};
//!
//! let omega = IntervalUnion::new(&[(0.0, 1.0)]).unwrap();
//! let report = spectrum(&omega, &BoundaryMatrix::identity(1), (-2.5, 2.5), &ScanOptions::default()).unwrap();
//! assert_eq!(report.len(), 5);
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod boundary;
pub mod error;
pub mod evolution;
pub mod expoly;
pub mod geometry;
pub mod linalg;
pub mod par;
pub mod paths;
pub mod spectrum;

pub use boundary::{BoundaryMatrix, MatrixStructure};
pub use error::{Error, ErrorClass, Result};
pub use expoly::{Atom, PiecewiseExpPoly};
pub use geometry::IntervalUnion;
pub use linalg::{CMatrix, C64};
pub use par::Execution;
pub use spectrum::ScanOptions;
