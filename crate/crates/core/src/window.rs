//! Dense evaluation of products of invariant kernels near a cutoff.
//!
//! A product `ℓ₀ δ₁ℓ₁ ⋯ δ_mℓ_m` in which one factor is a commutator with a
//! cutoff `χ^λ` has a diagonal supported within `R = Σ wᵢ` slices of the cut.
//! Those diagonal entries only involve intermediate sites within `2R` of the
//! cut, so a dense window of half-width `2R + 1` reproduces them exactly.

use crate::kernel::InvariantKernel;
use crate::linalg::{weighted_block_mul, CMat, C64};

#[derive(Clone, Debug)]
pub struct CutWindow {
    weights: Vec<f64>,
    cut: i64,
    reach: usize,
    lo: i64,
    hi: i64,
}

impl CutWindow {
    /// Window for the cutoff `χ^λ` (slices `s ≤ −λ`) and total reach `R`.
    /// The upper end is anchored independently of `λ`.
    pub fn new(weights: &[f64], lambda: usize, reach: usize) -> Self {
        let cut = -(lambda as i64);
        let margin = 2 * reach as i64 + 1;
        CutWindow { weights: weights.to_vec(), cut, reach, lo: cut - margin, hi: margin }
    }

    pub fn n_y(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize * self.n_y()
    }

    pub fn slice_of(&self, site: usize) -> i64 {
        self.lo + (site / self.n_y()) as i64
    }

    pub fn dense(&self, l: &InvariantKernel) -> CMat {
        l.dense(self.lo, self.hi)
    }

    /// `[φ, m]` for a fiber function `φ` repeated on every slice.
    pub fn fiber_commutator(&self, phi: &[C64], m: &CMat) -> CMat {
        let n = self.n_y();
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| (phi[i % n] - phi[j % n]) * m[(i, j)])
    }

    /// `[χ^λ, m]`.
    pub fn chi_commutator(&self, m: &CMat) -> CMat {
        let chi = |i: usize| (self.slice_of(i) <= self.cut) as i32 as f64;
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (chi(i) - chi(j)))
    }

    /// `a W b`.
    pub fn mul(&self, a: &CMat, b: &CMat) -> CMat {
        weighted_block_mul(a, &self.weights, b)
    }

    fn first_near_site(&self) -> usize {
        (self.cut - self.reach as i64 - self.lo) as usize * self.n_y()
    }

    /// Rows of `m` on slices within the reach of the cut.
    pub fn near_rows(&self, m: &CMat) -> CMat {
        let n = (2 * self.reach + 1) * self.n_y();
        m.rows(self.first_near_site(), n).into_owned()
    }

    /// Weighted diagonal of a matrix given by its [`CutWindow::near_rows`].
    pub fn near_trace(&self, rows: &CMat, fiber_diag: &[f64]) -> C64 {
        let first = self.first_near_site();
        let n = self.n_y();
        (0..rows.nrows()).map(|r| rows[(r, first + r)] * fiber_diag[(first + r) % n]).sum()
    }

    /// `Σ d_y m(s,y; s,y)` over slices within the reach of the cut.
    pub fn weighted_trace(&self, m: &CMat, fiber_diag: &[f64]) -> C64 {
        let n = self.n_y();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m.nrows() {
            if (self.slice_of(i) - self.cut).unsigned_abs() as usize <= self.reach {
                acc += m[(i, i)] * fiber_diag[i % n];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn shift_pair_trace_is_localized() {
        let w = [1.0];
        let win = CutWindow::new(&w, 2, 2);
        let up = InvariantKernel::shift(w.to_vec(), 1);
        let down = InvariantKernel::shift(w.to_vec(), -1);
        let m = win.mul(&win.dense(&down), &win.chi_commutator(&win.dense(&up)));
        assert_eq!(win.weighted_trace(&m, &w), c(-1.0, 0.0));
        let rows = win.mul(&win.near_rows(&win.dense(&down)), &win.chi_commutator(&win.dense(&up)));
        assert_eq!(win.near_trace(&rows, &w), c(-1.0, 0.0));
    }
}
