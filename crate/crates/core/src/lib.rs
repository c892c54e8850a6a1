//! Numerical workbench for relative cyclic cocycles on lattice models with
//! cylindrical ends.
//!
//! The crate realizes the Wiener-Hopf extension `0 → J → A → B → 0` on a
//! discrete cylinder `(−∞, L] × Y`, the cyclic cochain calculus on top of it,
//! the concrete trace, Roe, Melrose, Godbillon-Vey and Alexander-Spanier
//! functionals, lattice Dirac models with their index projections, and the
//! absolute and relative index pairings tied together by excision.
//!
//! Layout:
//! - [`geometry`], [`kernel`]: grid and the three kernel algebras.
//! - [`cyclic`]: Hochschild `b`, cyclicization, relative coboundary, suspension.
//! - [`cocycles`]: concrete functionals and the foliated toy models.
//! - [`dirac`]: boundary operators, folded two-ended Dirac models, projections.
//! - [`index`]: pairings, eta integrals, spectral flow, excision.
//! - [`report`]: residual records and their CSV/JSON encodings.
//! - [`suites`]: seeded identity suites producing those records.

pub mod cocycles;
pub mod cyclic;
pub mod dirac;
pub mod error;
pub mod geometry;
pub mod index;
pub mod kernel;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod suites;
pub mod window;

pub use error::{Error, Result};
pub use geometry::GridGeometry;
pub use kernel::{
    chi_commutator, compose, project_pi, section_s, section_t, CompactKernel, ExtendedKernel,
    InvariantKernel, Multiplier,
};
pub use linalg::{CMat, C64};
