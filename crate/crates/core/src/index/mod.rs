//! Index pairings: absolute pairings of Connes–Skandalis projectors,
//! relative pairings `τʳ(P − e₁) + ∫₁^∞ σ([ṗ,p], p, …) dt`, eta invariants
//! and the spectral-flow oracle.

pub mod bulk;
pub mod eta;
pub mod chern;
pub mod flow;
pub mod pairing;
pub mod gv_eta;
