//! Discrete harmonic analysis on the n-torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: multi-indices, boxes and the coarse decomposition of `Z^n`.
//! * [`symbol`]: operator-valued symbols `Z^n -> C^{m×m}`, difference
//!   operators, variation and the bounded-variation certificate.
//! * [`resolution`]: the smooth dyadic resolution of unity.
//! * [`transform`]: vector-valued trigonometric polynomials, grid
//!   evaluation, `L^p` norms and multiplier application.
//! * [`besov`]: Littlewood-Paley blocks, periodic Besov norms and the
//!   multiplier experiments built on them.
//! * [`elliptic`]: polynomial symbols of elliptic operators, resolvent
//!   estimates and the discrete Leibniz rule for inverses.
//! * [`pde`]: mode-wise solvers for the initial-value and time-periodic
//!   parabolic problems.
//! * [`io`]: the CSV and key-value file formats used by the CLI.
//! * [`suite`]: the desk-scale acceptance checks.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod besov;
pub mod elliptic;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod par;
pub mod pde;
pub mod random;
pub mod resolution;
pub mod suite;
pub mod symbol;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{CoarseCell, LatticeBox, LatticePoint};
pub use linalg::{CVec, Mat, C64};
pub use resolution::UnityResolution;
pub use symbol::OperatorSymbol;
pub use transform::TrigPolynomial;
