//! Schatten-type norms `‖k‖_m` of leafwise kernels.
//!
//! For each transversal point `θ` the kernel acts on the leaf space with the
//! volume-weighted inner product, `O_θ = V^{1/2} k_θ V^{1/2}`. With `χ` the
//! fundamental-domain mask, `(‖k‖_m)^m = sup_θ ‖χ |O_θ|^m χ‖₁`.

use crate::cocycles::toy::FoliatedToy;
use crate::cocycles::Weight;
use crate::kernel::CompactKernel;
use crate::linalg::{singular_values, CMat, HermEig};
use crate::{Error, Result};

fn leaf_blocks(toy: &FoliatedToy, k: &CompactKernel, w: &Weight) -> Vec<(CMat, Vec<f64>)> {
    let g = k.geometry();
    let vol = g.site_weights();
    (0..toy.trans)
        .map(|theta| {
            let sites: Vec<usize> = (0..g.dim()).filter(|&i| toy.theta_of(i % g.n_y) == theta).collect();
            let op = CMat::from_fn(sites.len(), sites.len(), |a, b| {
                k.matrix()[(sites[a], sites[b])] * (vol[sites[a]] * vol[sites[b]]).sqrt()
            });
            let mask = sites.iter().map(|&i| w.mask()[i % g.n_y]).collect();
            (op, mask)
        })
        .collect()
}

fn abs_power(op: &CMat, power: f64) -> CMat {
    let e = HermEig::new(&(op * op.adjoint()));
    e.apply(|x| x.max(0.0).powf(power / 2.0))
}

fn masked(m: &CMat, mask: &[f64]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * mask[i] * mask[j])
}

/// `‖k‖_m` from the trace norm of `χ |O|^m χ`.
pub fn shatten_norm(toy: &FoliatedToy, k: &CompactKernel, w: &Weight, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Invariant("norm order must be at least 1".into()));
    }
    let best = leaf_blocks(toy, k, w)
        .into_iter()
        .map(|(op, mask)| singular_values(&masked(&abs_power(&op, m as f64), &mask)).iter().sum::<f64>())
        .fold(0.0, f64::max);
    Ok(best.powf(1.0 / m as f64))
}

/// `‖k‖_m` from the Hilbert-Schmidt form `‖χ |O|^{m/2}‖²_HS`.
pub fn shatten_norm_hs(toy: &FoliatedToy, k: &CompactKernel, w: &Weight, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Invariant("norm order must be at least 1".into()));
    }
    let best = leaf_blocks(toy, k, w)
        .into_iter()
        .map(|(op, mask)| {
            let h = abs_power(&op, m as f64 / 2.0);
            (0..h.nrows()).map(|i| mask[i] * h.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(best.powf(1.0 / m as f64))
}
