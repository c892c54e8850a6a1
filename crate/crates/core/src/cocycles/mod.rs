//! Concrete functionals on the kernel algebras.
//!
//! [`traces`] holds the plain and regularized traces, the Roe and Melrose
//! 1-cocycles and the Hilbert-transform identity. [`toy`] builds finite
//! foliated and covering models with a free group action; [`gv`] and
//! [`alexander`] evaluate the Godbillon-Vey and Alexander-Spanier cocycles
//! on them. [`shatten`] computes Schatten-type norms as diagnostics.

pub mod alexander;
pub mod gv;
pub mod shatten;
pub mod toy;
pub mod traces;
mod weight;

pub use weight::Weight;
