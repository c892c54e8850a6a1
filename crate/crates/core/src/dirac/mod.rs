//! Lattice Dirac operators `D⁺ = ∂_s + A(s)` with cylindrical ends and their
//! index projections.
//!
//! A two-ended operator on the line is folded at the middle of its interior
//! into a one-ended operator whose fiber is two copies of the boundary fiber.
//! Operators are dense matrices in an orthonormal site basis; the grids use
//! unit fiber volumes so kernels and matrices differ only by the factor `hs`.

mod boundary;
mod model;
mod parametrix;
mod path;
mod projections;

pub use boundary::{circle_dirac, spectral_gap_check, BoundaryOperator, GapCheck};
pub use model::{DiracModel, ModelSpec, Preset, TGrid};
pub use parametrix::{aps_parametrix, connes_skandalis_projector, CsProjector, Parametrix, ParametrixSummary};
pub use path::{
    cylinder_projection_path, kernel_from_symbol, symbol_coefficients, transgression_integrand, PathSample, ProjectionPath,
    SampleDiagnostics, Symbol, KERNEL_TRUNCATION,
};
pub use projections::{
    graph_projection, graph_projection_derivative, projection, projection_derivative, wassermann_projection,
    wassermann_projection_derivative, ProjectionKind,
};
