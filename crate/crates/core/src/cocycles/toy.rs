//! Finite foliated and covering models with a free `ℤ_q` action.
//!
//! The fiber of a slice is `T × Ỹ × ℂ^rank` with `Ỹ = ℤ_q × {0..m}`; the
//! generator acts by `y ↦ y + m` on the leaf and `θ ↦ θ + shift` on `T`.
//! Kernels are leafwise (block diagonal in `θ`) and invariant under the
//! diagonal action. Site order is `((θ · qm) + y) · rank + r`.

use std::sync::Arc;

use crate::cocycles::Weight;
use crate::geometry::GridGeometry;
use crate::kernel::{CompactKernel, ExtendedKernel, InvariantKernel, Multiplier};
use crate::linalg::{c, CMat, C64};
use crate::random::Rng;
use crate::{Error, Result};

/// Choice of fundamental domain for the weight mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// The first leaf block `y < m` at every `θ`.
    FirstBlock,
    /// Leaf point `i` of each block taken from block `i mod q`.
    Interleaved,
}

#[derive(Clone, Debug)]
pub struct FoliatedToy {
    pub q: usize,
    pub m: usize,
    pub trans: usize,
    pub trans_shift: usize,
    pub rank: usize,
    /// Leaf volumes of one block, repeated on every block.
    pub leaf_vol: Vec<f64>,
    /// Transverse volume, uniform so that the action preserves it.
    pub trans_vol: f64,
}

impl FoliatedToy {
    pub fn new(q: usize, m: usize, trans: usize, trans_shift: usize, rank: usize, leaf_vol: Vec<f64>, trans_vol: f64) -> Result<Self> {
        if q == 0 || m == 0 || trans == 0 || rank == 0 {
            return Err(Error::Invariant("empty toy dimension".into()));
        }
        if leaf_vol.len() != m {
            return Err(Error::Shape("leaf volume per block point required".into()));
        }
        Ok(FoliatedToy { q, m, trans, trans_shift, rank, leaf_vol, trans_vol })
    }

    /// Galois covering of a discretized circle: `T` is a point.
    pub fn covering(q: usize, m: usize, rank: usize) -> Result<Self> {
        Self::new(q, m, 1, 0, rank, vec![1.0; m], 1.0)
    }

    pub fn leaf_size(&self) -> usize {
        self.q * self.m
    }

    pub fn n_y(&self) -> usize {
        self.trans * self.leaf_size() * self.rank
    }

    fn decompose(&self, x: usize) -> (usize, usize, usize) {
        let r = x % self.rank;
        let rest = x / self.rank;
        (rest / self.leaf_size(), rest % self.leaf_size(), r)
    }

    fn compose_index(&self, theta: usize, y: usize, r: usize) -> usize {
        (theta * self.leaf_size() + y) * self.rank + r
    }

    pub fn theta_of(&self, x: usize) -> usize {
        self.decompose(x).0
    }

    /// Site permutation of `γᵏ`.
    pub fn action(&self, k: usize) -> Vec<usize> {
        (0..self.n_y())
            .map(|x| {
                let (t, y, r) = self.decompose(x);
                let t2 = (t + k * self.trans_shift) % self.trans;
                let y2 = (y + k * self.m) % self.leaf_size();
                self.compose_index(t2, y2, r)
            })
            .collect()
    }

    pub fn group(&self) -> Vec<Vec<usize>> {
        (0..self.q).map(|k| self.action(k)).collect()
    }

    /// Grid volumes per fiber site: the leaf volume.
    pub fn fiber_volumes(&self) -> Vec<f64> {
        (0..self.n_y()).map(|x| self.leaf_vol[self.decompose(x).1 % self.m]).collect()
    }

    pub fn geometry(&self, depth: usize, length: usize, bandwidth: usize, lambda0: usize, hs: f64) -> Result<Arc<GridGeometry>> {
        Ok(Arc::new(GridGeometry::new(self.n_y(), depth, length, bandwidth, lambda0, hs, self.fiber_volumes())?))
    }

    /// Fundamental-domain weight with volume `leaf_vol · trans_vol`.
    pub fn weight(&self, domain: Domain) -> Result<Weight> {
        let mask = (0..self.n_y())
            .map(|x| {
                let (_, y, _) = self.decompose(x);
                let (block, i) = (y / self.m, y % self.m);
                let keep = match domain {
                    Domain::FirstBlock => block == 0,
                    Domain::Interleaved => block == i % self.q,
                };
                keep as i32 as f64
            })
            .collect();
        let volume = self.fiber_volumes().iter().map(|v| v * self.trans_vol).collect();
        let w = Weight::new(mask, volume)?;
        w.check_tiling(&self.group())?;
        Ok(w)
    }

    /// Averages a fiber block over the group and removes cross-leaf entries.
    pub fn project_block(&self, b: &CMat) -> CMat {
        let perms = self.group();
        let q = self.q as f64;
        CMat::from_fn(b.nrows(), b.ncols(), |i, j| {
            if self.theta_of(i) != self.theta_of(j) {
                return c(0.0, 0.0);
            }
            perms.iter().map(|p| b[(p[i], p[j])]).sum::<C64>() / q
        })
    }

    /// Applies [`FoliatedToy::project_block`] to every slice block.
    pub fn project_matrix(&self, m: &CMat) -> CMat {
        let n = self.n_y();
        let ns = m.nrows() / n;
        let mut out = m.clone();
        for a in 0..ns {
            for b in 0..ns {
                let blk = m.view((a * n, b * n), (n, n)).into_owned();
                out.view_mut((a * n, b * n), (n, n)).copy_from(&self.project_block(&blk));
            }
        }
        out
    }

    /// Largest deviation of a fiber-blocked matrix from invariance.
    pub fn invariance_defect(&self, m: &CMat) -> f64 {
        crate::linalg::max_abs(&(self.project_matrix(m) - m))
    }

    pub fn random_invariant(&self, rng: &mut Rng, weights: Vec<f64>, w: usize) -> Result<InvariantKernel> {
        let n = self.n_y();
        InvariantKernel::from_fn(weights, w, |_| self.project_block(&rng.matrix(n, n)))
    }

    pub fn random_extended(&self, rng: &mut Rng, geom: &Arc<GridGeometry>, w: usize, lambda: usize) -> Result<ExtendedKernel> {
        let tail = self.random_invariant(rng, geom.fiber_weights(), w)?;
        let k = (geom.length + lambda) * geom.n_y;
        let core = self.project_matrix(&rng.matrix(k, k));
        ExtendedKernel::from_tail_and_core(geom.clone(), tail, &core, lambda)
    }

    /// Random invariant compact kernel supported on slices `> −depth`.
    pub fn random_compact(&self, rng: &mut Rng, geom: &Arc<GridGeometry>, depth: usize) -> Result<CompactKernel> {
        let n = geom.dim();
        let lo = geom.offset(1 - depth as i64);
        let mut m = crate::linalg::zeros(n, n);
        let k = n - lo;
        m.view_mut((lo, lo), (k, k)).copy_from(&self.project_matrix(&rng.matrix(k, k)));
        CompactKernel::new(geom.clone(), m)
    }

    /// Random real invariant fiber function.
    pub fn random_fiber_function(&self, rng: &mut Rng) -> Vec<C64> {
        let raw = rng.real_vec(self.n_y());
        let perms = self.group();
        (0..self.n_y())
            .map(|x| c(perms.iter().map(|p| raw[p[x]]).sum::<f64>() / self.q as f64, 0.0))
            .collect()
    }

    /// Random real fiber function with no symmetry.
    pub fn random_plain_function(&self, rng: &mut Rng) -> Vec<C64> {
        rng.real_vec(self.n_y()).into_iter().map(|v| c(v, 0.0)).collect()
    }

    /// Multiplier equal to `cyl` on slices `≤ −λ` and to an arbitrary
    /// function of the same symmetry type above.
    pub fn random_multiplier(&self, rng: &mut Rng, geom: &Arc<GridGeometry>, cyl: &[C64], lambda: usize, invariant: bool) -> Result<Multiplier> {
        let mut values = Vec::with_capacity(geom.dim());
        for s in geom.s_min()..=geom.s_max() {
            if s <= -(lambda as i64) {
                values.extend_from_slice(cyl);
            } else {
                let extra = if invariant { self.random_fiber_function(rng) } else { self.random_plain_function(rng) };
                values.extend(cyl.iter().zip(extra).map(|(a, b)| a + b));
            }
        }
        Multiplier::new(geom.clone(), values, lambda)
    }

    /// The translate `x ↦ f(γ⁻ᵏ x)` of a fiber function.
    pub fn translate(&self, f: &[C64], k: usize) -> Vec<C64> {
        let p = self.action(k);
        let mut out = vec![c(0.0, 0.0); f.len()];
        for (x, &px) in p.iter().enumerate() {
            out[px] = f[x];
        }
        out
    }

    /// The translate of a multiplier, slice by slice.
    pub fn translate_multiplier(&self, phi: &Multiplier, k: usize) -> Result<Multiplier> {
        let n = self.n_y();
        let values: Vec<C64> = phi.values().chunks(n).flat_map(|blk| self.translate(blk, k)).collect();
        Multiplier::new(phi.geometry().clone(), values, phi.lambda())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::traces::weight_omega;

    fn toy() -> FoliatedToy {
        FoliatedToy::new(2, 2, 2, 1, 1, vec![1.0, 1.5], 0.5).unwrap()
    }

    #[test]
    fn both_domains_tile() {
        let t = toy();
        assert!(t.weight(Domain::FirstBlock).is_ok());
        assert!(t.weight(Domain::Interleaved).is_ok());
        let bad = Weight::new(vec![1.0; t.n_y()], t.fiber_volumes()).unwrap();
        assert!(bad.check_tiling(&t.group()).is_err());
    }

    #[test]
    fn projection_is_idempotent_and_invariant() {
        let t = toy();
        let mut rng = Rng::seeded(5);
        let b = t.project_block(&rng.matrix(8, 8));
        assert!(t.invariance_defect(&b) < 1e-15);
        assert!(crate::linalg::max_abs(&(t.project_block(&b) - &b)) < 1e-15);
    }

    #[test]
    fn identity_weight_counts_domain() {
        let t = FoliatedToy::new(2, 3, 1, 0, 2, vec![1.0; 3], 1.0).unwrap();
        let g = t.geometry(8, 2, 1, 2, 1.0).unwrap();
        let id = InvariantKernel::identity(g.fiber_weights());
        let mut m = crate::linalg::zeros(g.dim(), g.dim());
        let o = g.offset(1);
        m.view_mut((o, o), (g.n_y, g.n_y)).copy_from(&id.coeff(0));
        let k = CompactKernel::new(g, m).unwrap();
        let v = weight_omega(&k, &t.weight(Domain::FirstBlock).unwrap()).unwrap();
        assert!((v - c(6.0, 0.0)).norm() < 1e-14);
    }
}
