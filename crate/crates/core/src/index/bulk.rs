//! Regularized trace `τ₀ʳ(P − e₁)` of the graph and Wassermann projections
//! of a folded model: `Σ_{s≥−S} tr(P − e₁)(s,s) − (S+1)·tr(p∞ − e₁)(0)`,
//! where `p∞` is the cylinder projection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dirac::{projection, DiracModel, ProjectionKind};
use crate::linalg::{c, eye, inverse, left_surface_green, max_abs, trace, zeros, CMat, HermBlockTridiag, HermEig, C64};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct BulkTerm {
    pub value: C64,
    pub depth: usize,
    /// Per-slice density `tr(p∞ − e₁)(0)` of the cylinder.
    pub cylinder_density: C64,
    /// `max |R(−S,−S) − r₀|` for the graph route, or the slice density defect
    /// at the inner edge of the window for the heat route.
    pub edge_residual: f64,
}

/// `(1/2π) ∫ f(X(μ)) dμ` for a periodic symbol, by the trapezoid rule on
/// doubling grids.
fn symbol_mean(model: &DiracModel, f: &dyn Fn(&CMat) -> Result<CMat>) -> Result<CMat> {
    let sym = model.symbol();
    let mut n = 64usize;
    let mut prev: Option<CMat> = None;
    loop {
        let mut acc = zeros(model.fiber_dim(), model.fiber_dim());
        for j in 0..n {
            acc += f(&sym.value(2.0 * std::f64::consts::PI * j as f64 / n as f64))?;
        }
        let mean = acc / c(n as f64, 0.0);
        if let Some(p) = &prev {
            if max_abs(&(&mean - p)) < 1e-15 {
                return Ok(mean);
            }
        }
        if n >= 1 << 16 {
            return Err(Error::NotConverged("symbol mean".into()));
        }
        prev = Some(mean);
        n *= 2;
    }
}

fn gram_blocks(model: &DiracModel, lo: i64, adjoint_first: bool) -> Result<HermBlockTridiag> {
    let lf = model.interior();
    let f = model.fiber_dim();
    // H(s,s') = δ + Σ_r D(r,s)† D(r,s')  or  δ + Σ_r D(s,r) D(s',r)†
    let entry = |s: i64, sp: i64| -> CMat {
        let mut acc = if s == sp { eye(f) } else { zeros(f, f) };
        for r in (s.min(sp) - 1)..=(s.max(sp) + 1) {
            if r > lf {
                continue;
            }
            acc += if adjoint_first {
                model.block(r, s).adjoint() * model.block(r, sp)
            } else {
                model.block(s, r) * model.block(sp, r).adjoint()
            };
        }
        acc
    };
    let diag = (lo..=lf).map(|s| entry(s, s)).collect();
    let upper = (lo..lf).map(|s| entry(s, s + 1)).collect();
    let far = (lo..lf - 1).map(|s| max_abs(&entry(s, s + 2))).fold(0.0, f64::max);
    if far > 0.0 {
        return Err(Error::Invariant(format!("Gram operator has next-nearest blocks ({far:e})")));
    }
    Ok(HermBlockTridiag { diag, upper })
}

fn surface_sigma(coeffs: &BTreeMap<i64, CMat>, f: usize, adjoint_first: bool) -> Result<CMat> {
    let zero = zeros(f, f);
    let get = |n: i64| coeffs.get(&n).unwrap_or(&zero);
    let mut h0 = eye(f);
    let mut u = zeros(f, f);
    for (n, cn) in coeffs {
        if adjoint_first {
            h0 += cn.adjoint() * cn;
            u += cn.adjoint() * get(n - 1);
        } else {
            h0 += cn * cn.adjoint();
            u += cn * get(n + 1).adjoint();
        }
    }
    let g = left_surface_green(&h0, &u, 1e-15)?;
    Ok(u.adjoint() * g * u)
}

/// Graph-projection bulk by block-tridiagonal inversion of `1 + D⁻D⁺` and
/// `1 + D⁺D⁻` on `[−S, L]` with the cylinder `s < −S` eliminated exactly.
pub fn graph_bulk(model: &DiracModel, depth: usize) -> Result<BulkTerm> {
    let lo = -(depth as i64);
    let f = model.fiber_dim();
    let coeffs = model.cylinder_coefficients();
    let r_diag = gram_blocks(model, lo, true)?.inverse_diagonal(Some(&surface_sigma(&coeffs, f, true)?))?;
    let rp_diag = gram_blocks(model, lo, false)?.inverse_diagonal(Some(&surface_sigma(&coeffs, f, false)?))?;
    let r0 = symbol_mean(model, &|x| inverse(&(eye(f) + x.adjoint() * x)))?;
    let rp0 = symbol_mean(model, &|x| inverse(&(eye(f) + x * x.adjoint())))?;
    let density = trace(&r0) - trace(&rp0);
    let sum: C64 = r_diag.iter().zip(&rp_diag).map(|(a, b)| trace(a) - trace(b)).sum();
    let edge = max_abs(&(&r_diag[0] - &r0)).max(max_abs(&(&rp_diag[0] - &rp0)));
    Ok(BulkTerm { value: sum - density * (depth as f64 + 1.0), depth, cylinder_density: density, edge_residual: edge })
}

/// Wassermann bulk: heat operators on a dense window `[−S − margin, L]`,
/// summed over `s ≥ −S`.
pub fn wassermann_bulk(model: &DiracModel, depth: usize, margin: usize) -> Result<BulkTerm> {
    let lo = -((depth + margin) as i64);
    let f = model.fiber_dim();
    let d = model.dense(lo);
    let heat = |m: CMat| HermEig::new(&m).apply(|x| (-x).exp());
    let a = heat(d.adjoint() * &d);
    let b = heat(&d * d.adjoint());
    let k0 = symbol_mean(model, &|x| Ok(HermEig::new(&(x.adjoint() * x)).apply(|v| (-v).exp())))?;
    let kp0 = symbol_mean(model, &|x| Ok(HermEig::new(&(x * x.adjoint())).apply(|v| (-v).exp())))?;
    let density = trace(&k0) - trace(&kp0);
    let slice_tr = |m: &CMat, i: usize| (0..f).map(|k| m[(i * f + k, i * f + k)]).sum::<C64>();
    let sum: C64 = (margin..d.nrows() / f).map(|i| slice_tr(&a, i) - slice_tr(&b, i)).sum();
    let edge = (slice_tr(&a, margin) - slice_tr(&b, margin) - density).norm();
    Ok(BulkTerm { value: sum - density * (depth as f64 + 1.0), depth, cylinder_density: density, edge_residual: edge })
}

/// `τ₀ʳ(P − e₁)` for the chosen projection.
pub fn bulk(model: &DiracModel, kind: ProjectionKind, depth: usize) -> Result<BulkTerm> {
    match kind {
        ProjectionKind::Graph => graph_bulk(model, depth),
        ProjectionKind::Wassermann => wassermann_bulk(model, depth, 20),
    }
}

/// Largest difference between the deep block of the dense graph projection
/// of the model and the cylinder projection kernel at `t = 1`.
pub fn cylinder_membership_residual(model: &DiracModel, kind: ProjectionKind) -> Result<f64> {
    let depth = model.window() as i64;
    let f = model.fiber_dim();
    let e = projection(kind, &model.dense(-depth))?;
    let path = crate::dirac::ProjectionPath::from_symbol(&model.symbol(), model.h(), kind, &[1.0])?;
    let p = &path.samples[0].p;
    let n_all = e.nrows() / 2;
    let mid = (depth / 2) as usize;
    let mut worst = 0.0f64;
    for off in -3i64..=3 {
        let j = (mid as i64 - off) as usize;
        let ker = p.coeff(off) * c(model.h(), 0.0);
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let half = f;
            let blk = e.view((bi * n_all + mid * f, bj * n_all + j * f), (f, f)).into_owned();
            let want = ker.view((bi * half, bj * half), (half, half)).into_owned();
            worst = worst.max(max_abs(&(blk - want)));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_bulk_is_depth_independent_and_matches_dense() {
        let m = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 4, 30).unwrap();
        let a = graph_bulk(&m, 20).unwrap();
        let b = graph_bulk(&m, 35).unwrap();
        assert!((a.value - b.value).norm() < 1e-12, "{} {}", a.value, b.value);
        assert!(a.edge_residual < 1e-10);
        // dense reference on a long window
        let d = m.dense(-120);
        let f = 2;
        let r = inverse(&(eye(d.nrows()) + d.adjoint() * &d)).unwrap();
        let rp = inverse(&(eye(d.nrows()) + &d * d.adjoint())).unwrap();
        let start = (120 - 20) * f;
        let sum: C64 = (start..d.nrows()).map(|i| r[(i, i)] - rp[(i, i)]).sum();
        let dense = sum - a.cylinder_density * 21.0;
        assert!((dense - a.value).norm() < 1e-10, "{dense} {}", a.value);
    }

    #[test]
    fn constant_model_bulk_vanishes() {
        let m = DiracModel::scalar(1.0, 1.0, 4.0, 0.5, 4, 30).unwrap();
        assert!(graph_bulk(&m, 10).unwrap().value.norm() < 1e-12);
        assert!(wassermann_bulk(&m, 10, 20).unwrap().value.norm() < 1e-10);
    }

    #[test]
    fn deep_block_is_the_cylinder_projection() {
        let m = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 4, 40).unwrap();
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            assert!(cylinder_membership_residual(&m, kind).unwrap() < 1e-8);
        }
    }
}
