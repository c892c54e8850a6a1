//! Seeded random inputs for identity testing.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMat, C64};

/// Deterministic generator; the same seed gives the same stream on every
/// platform.
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on `[-1, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.gen_range(-1.0..1.0)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    pub fn complex(&mut self) -> C64 {
        c(self.uniform(), self.uniform())
    }

    pub fn matrix(&mut self, r: usize, cols: usize) -> CMat {
        CMat::from_fn(r, cols, |_, _| self.complex())
    }

    pub fn hermitian(&mut self, n: usize) -> CMat {
        let a = self.matrix(n, n);
        (&a + a.adjoint()).scale(0.5)
    }

    pub fn real_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }
}
