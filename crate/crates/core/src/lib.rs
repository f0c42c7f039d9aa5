//! Numerical laboratory for towers of squares joined by small windows.
//!
//! A tower is a chain of axis-aligned open squares of strictly growing
//! half-widths, each touching the next on a shared face. Digging a small
//! open window square across each shared face turns the disjoint union
//! into a connected open set. This crate builds such domains exactly (all
//! breakpoints are dyadic rationals), discretizes their Dirichlet
//! Laplacians on uniform grids, computes and tracks eigenpairs with
//! shift-invert Lanczos, measures resolvent-difference operator norms and
//! Schatten trace norms, and drives the window-shrinking growth procedure
//! that keeps a chosen eigenbranch pinned while the tower grows.
//!
//! The crate is `no_std` (alloc required); all IO, file formats and the
//! command-line front end live in the companion `spectral-tower-cli`
//! crate.

#![no_std]

extern crate alloc;

pub mod construction;
pub mod dyadic;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod lanczos;
pub mod quasimode;
pub mod rng;
pub mod sparse;
pub mod spectral;

pub use dyadic::Dyadic;
pub use error::TowerError;
pub use geometry::{Region, TowerSpec};
pub use grid::GridDomain;
pub use sparse::{LdltFactor, SparseSymmetricOperator};
pub use spectral::EigenPair;

