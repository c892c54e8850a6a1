use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fundamental-domain weight: `ω(k) = Σ mask · volume · hs · k(x, x)`.
///
/// Mask and volume are given per fiber site and repeat on every slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    mask: Vec<f64>,
    volume: Vec<f64>,
}

impl Weight {
    pub fn new(mask: Vec<f64>, volume: Vec<f64>) -> Result<Self> {
        if mask.len() != volume.len() {
            return Err(Error::Shape("mask and volume lengths differ".into()));
        }
        if mask.iter().any(|m| *m != 0.0 && *m != 1.0) {
            return Err(Error::Invariant("mask entries must be 0 or 1".into()));
        }
        if volume.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Invariant("volumes must be positive".into()));
        }
        Ok(Weight { mask, volume })
    }

    /// Unmasked weight; with the grid volumes this is the plain trace.
    pub fn full(volume: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; volume.len()], volume)
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    pub fn volume(&self) -> &[f64] {
        &self.volume
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Checks that the translates of the mask under the given fiber
    /// permutations cover every site exactly once.
    pub fn check_tiling(&self, perms: &[Vec<usize>]) -> Result<()> {
        let mut count = vec![0.0; self.len()];
        for p in perms {
            if p.len() != self.len() {
                return Err(Error::Shape("permutation length differs from fiber".into()));
            }
            for (x, &m) in self.mask.iter().enumerate() {
                count[p[x]] += m;
            }
        }
        match count.iter().position(|c| *c != 1.0) {
            Some(x) => Err(Error::Invariant(format!("mask translates cover site {x} {} times", count[x]))),
            None => Ok(()),
        }
    }

    /// `mask · volume · hs` per fiber site.
    pub fn fiber_diag(&self, hs: f64) -> Vec<f64> {
        self.mask.iter().zip(&self.volume).map(|(m, v)| m * v * hs).collect()
    }
}
