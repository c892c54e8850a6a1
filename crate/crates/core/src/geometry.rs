//! The discrete cylinder-ended grid.
//!
//! Slices `s ∈ [−S, L]` carry `n_y` fiber sites each. Slices `s ≤ 0` belong
//! to the cylinder `(−∞, 0] × Y`; `s > 0` is the interior. Site `(s, y)` has
//! flat index `(s + S)·n_y + y` and volume `hs · vol_y[y]`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    /// Fiber sites per slice.
    pub n_y: usize,
    /// Window depth `S`: the window starts at slice `−S`.
    pub depth: usize,
    /// Interior length `L`: the window ends at slice `L`.
    pub length: usize,
    /// Cap on tail bandwidths of kernels living on this grid.
    pub bandwidth: usize,
    /// Maximal invariance depth `λ₀` of extended kernels.
    pub lambda0: usize,
    /// Slice step.
    pub hs: f64,
    /// Fiber volumes.
    pub vol_y: Vec<f64>,
}

impl GridGeometry {
    pub fn new(
        n_y: usize,
        depth: usize,
        length: usize,
        bandwidth: usize,
        lambda0: usize,
        hs: f64,
        vol_y: Vec<f64>,
    ) -> Result<Self> {
        let g = GridGeometry { n_y, depth, length, bandwidth, lambda0, hs, vol_y };
        g.validate()?;
        Ok(g)
    }

    /// Unit slice step and unit fiber volumes.
    pub fn uniform(n_y: usize, depth: usize, length: usize, bandwidth: usize, lambda0: usize) -> Result<Self> {
        Self::new(n_y, depth, length, bandwidth, lambda0, 1.0, vec![1.0; n_y])
    }

    /// Smallest admissible window for the given fiber, bandwidth and depth.
    pub fn minimal(n_y: usize, length: usize, bandwidth: usize, lambda0: usize) -> Result<Self> {
        Self::uniform(n_y, lambda0 + 2 * bandwidth + 2, length, bandwidth, lambda0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y == 0 {
            return Err(Error::Invariant("empty fiber".into()));
        }
        if self.vol_y.len() != self.n_y {
            return Err(Error::Shape(format!("vol_y has {} entries for n_y = {}", self.vol_y.len(), self.n_y)));
        }
        if !(self.hs > 0.0 && self.hs.is_finite()) || self.vol_y.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Invariant("volumes must be positive and finite".into()));
        }
        if self.depth < self.lambda0 + 2 * self.bandwidth + 2 {
            return Err(Error::WindowTooSmall(format!(
                "depth {} < lambda0 + 2w + 2 = {}",
                self.depth,
                self.lambda0 + 2 * self.bandwidth + 2
            )));
        }
        Ok(())
    }

    pub fn s_min(&self) -> i64 {
        -(self.depth as i64)
    }

    pub fn s_max(&self) -> i64 {
        self.length as i64
    }

    pub fn n_slices(&self) -> usize {
        self.depth + self.length + 1
    }

    pub fn dim(&self) -> usize {
        self.n_slices() * self.n_y
    }

    pub fn contains_slice(&self, s: i64) -> bool {
        s >= self.s_min() && s <= self.s_max()
    }

    /// Flat index of the first site of slice `s`.
    pub fn offset(&self, s: i64) -> usize {
        debug_assert!(self.contains_slice(s));
        (s + self.depth as i64) as usize * self.n_y
    }

    pub fn slice_of(&self, site: usize) -> i64 {
        (site / self.n_y) as i64 - self.depth as i64
    }

    pub fn fiber_of(&self, site: usize) -> usize {
        site % self.n_y
    }

    /// `hs · vol_y`, the diagonal of the slice measure `W`.
    pub fn fiber_weights(&self) -> Vec<f64> {
        self.vol_y.iter().map(|v| v * self.hs).collect()
    }

    /// Volume of every site in flat order.
    pub fn site_weights(&self) -> Vec<f64> {
        let w = self.fiber_weights();
        (0..self.dim()).map(|i| w[i % self.n_y]).collect()
    }

    /// Same grid with a different window depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        let mut g = self.clone();
        g.depth = depth;
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let g = GridGeometry::uniform(3, 10, 4, 2, 3).unwrap();
        assert_eq!(g.n_slices(), 15);
        assert_eq!(g.dim(), 45);
        for site in 0..g.dim() {
            let s = g.slice_of(site);
            assert_eq!(g.offset(s) + g.fiber_of(site), site);
        }
        assert_eq!(g.offset(-10), 0);
    }

    #[test]
    fn shallow_window_is_rejected() {
        assert!(matches!(GridGeometry::uniform(1, 5, 2, 2, 2), Err(Error::WindowTooSmall(_))));
        assert!(GridGeometry::minimal(1, 2, 2, 2).is_ok());
    }
}
