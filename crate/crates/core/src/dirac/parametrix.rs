//! Glued parametrix `Q` for `D⁺` and the Connes–Skandalis projector.
//!
//! `Q = Φ' Q_cyl Φ + Ψ' Q_int Ψ` with `Φ = χ_{s≤g}`, `Φ' = χ_{s≤g+1}`,
//! `Ψ = χ_{s≥g+1}`, `Ψ' = χ_{s≥g}`. `Q_cyl` is the Toeplitz operator of
//! `X(μ)⁻¹`, `Q_int` a thresholded pseudo-inverse of `D⁺` compressed to a box
//! reaching `b` slices left of the gluing slice, where `b` is where `Q_cyl`
//! has decayed below `1e−11`. Constant profiles use the exact inverse of the
//! unfolded line operator instead.

use std::collections::BTreeMap;

use serde::Serialize;

use super::model::DiracModel;
use super::path::symbol_coefficients;
use crate::linalg::{block_mul, c, matmul, eye, inverse, max_abs, pinv, trace, zeros, CMat, C64};
use crate::{Error, Result};

const Q_TRUNCATION: f64 = 1e-16;
const BOX_DECAY: f64 = 1e-11;
const PINV_CUT: f64 = 1e-7;
pub const DEEP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Parametrix {
    pub gluing: i64,
    /// First slice of the computational window.
    pub window_lo: i64,
    /// First slice of the region carrying the remainders.
    pub region_lo: i64,
    pub interior: i64,
    pub fiber: usize,
    pub q: CMat,
    pub dplus: CMat,
    /// `1 − QD⁺`, zero outside the region.
    pub splus: CMat,
    /// `1 − D⁺Q`, zero outside the region.
    pub sminus: CMat,
    pub deep_residual: f64,
    /// Singular values dropped by the interior pseudo-inverse.
    pub dropped: usize,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParametrixSummary {
    pub gluing: i64,
    pub region_lo: i64,
    pub window_lo: i64,
    pub deep_residual: f64,
    pub dropped: usize,
    pub exact: bool,
}

impl Parametrix {
    fn index_of(&self, s: i64) -> usize {
        (s - self.window_lo) as usize * self.fiber
    }

    fn region(&self) -> std::ops::Range<usize> {
        self.index_of(self.region_lo)..self.q.nrows()
    }

    /// `Tr S₊² − Tr S₋²`.
    pub fn index(&self) -> C64 {
        crate::linalg::trace_of_product(&self.splus, &self.splus) - crate::linalg::trace_of_product(&self.sminus, &self.sminus)
    }

    pub fn summary(&self) -> ParametrixSummary {
        ParametrixSummary {
            gluing: self.gluing,
            region_lo: self.region_lo,
            window_lo: self.window_lo,
            deep_residual: self.deep_residual,
            dropped: self.dropped,
            exact: self.exact,
        }
    }
}

/// Coefficients of `X(μ)⁻¹` and the radius where they fall below `tol`.
fn inverse_symbol(x: &(dyn Fn(f64) -> CMat + Sync), dim: usize) -> Result<(BTreeMap<i64, CMat>, i64, i64)> {
    let q = symbol_coefficients(dim, Q_TRUNCATION, &|mu| inverse(&x(mu)))?;
    let radius = |tol: f64| q.iter().filter(|(_, m)| max_abs(m) > tol).map(|(k, _)| k.abs()).max().unwrap_or(0);
    let (nq, b) = (radius(Q_TRUNCATION), radius(BOX_DECAY) + 2);
    Ok((q, nq, b))
}

/// Parametrix glued at slice `g ≤ −2`.
pub fn aps_parametrix(model: &DiracModel, gluing: i64) -> Result<Parametrix> {
    if gluing > -2 {
        return Err(Error::Invariant(format!("gluing slice {gluing} must be ≤ −2")));
    }
    model.check_gap(1e-6)?;
    let f = model.fiber_dim();
    let n = model.n();
    let lf = model.interior();
    let exact = model.is_constant();
    let (qcyl, nq, b) = if exact {
        // line symbol of the upper branch
        let a = model.a_minus().matrix().clone();
        let (h, sc) = (model.h(), model.scale());
        inverse_symbol(&move |mu| &a + eye(n) * (C64::from_polar(1.0, mu) - 1.0) * c(sc / h, 0.0), n)?
    } else {
        let sym = model.symbol();
        inverse_symbol(&move |mu| sym.value(mu), f)?
    };
    let region_lo = gluing - b.max(nq) - 2;
    let window_lo = region_lo - nq - 4;
    let ns = (lf - window_lo + 1) as usize;
    let dim = ns * f;
    let at = |s: i64| (s - window_lo) as usize * f;
    let mut q = zeros(dim, dim);
    let mut dropped = 0;
    if exact {
        let lp = model.line_length();
        // folded site (s, branch) ↦ line position
        let line = |s: i64, lower: bool| if lower { lp - s } else { s };
        for s in window_lo..=lf {
            for sp in window_lo..=lf {
                for (bi, lower) in [false, true].into_iter().enumerate() {
                    for (bj, lower_p) in [false, true].into_iter().enumerate() {
                        if let Some(blk) = qcyl.get(&(line(s, lower) - line(sp, lower_p))) {
                            q.view_mut((at(s) + bi * n, at(sp) + bj * n), (n, n)).copy_from(blk);
                        }
                    }
                }
            }
        }
    } else {
        for s in window_lo..=(gluing + 1) {
            for sp in window_lo..=gluing {
                if let Some(blk) = qcyl.get(&(s - sp)) {
                    q.view_mut((at(s), at(sp)), (f, f)).copy_from(blk);
                }
            }
        }
        let box_lo = gluing - b;
        let (qint, d) = pinv(&model.dense(box_lo), PINV_CUT)?;
        dropped = d;
        let off = (gluing - box_lo) as usize * f;
        let from = |s: i64| (s - box_lo) as usize * f;
        let rows = (lf - gluing + 1) as usize * f;
        let cols = (lf - gluing) as usize * f;
        let blk = qint.view((from(gluing), from(gluing + 1)), (rows, cols)).into_owned();
        debug_assert_eq!(from(gluing), off);
        let mut target = q.view_mut((at(gluing), at(gluing + 1)), (rows, cols));
        target += blk;
    }
    let dplus = model.dense(window_lo);
    let one = eye(dim);
    let mut splus = &one - block_mul(&q, &dplus, f);
    let mut sminus = &one - block_mul(&dplus, &q, f);
    let reg = at(region_lo);
    let deep_hi = at(gluing - nq - 1).max(reg);
    let mut deep = 0.0f64;
    for m in [&splus, &sminus] {
        for i in reg..dim {
            for j in reg..dim {
                if i < deep_hi || j < deep_hi {
                    deep = deep.max(m[(i, j)].norm());
                }
            }
        }
    }
    if deep > DEEP_TOLERANCE {
        return Err(Error::WindowTooSmall(format!("remainder {deep:e} on the deep block")));
    }
    for m in [&mut splus, &mut sminus] {
        m.rows_mut(0, reg).fill(c(0.0, 0.0));
        m.columns_mut(0, reg).fill(c(0.0, 0.0));
    }
    Ok(Parametrix {
        gluing,
        window_lo,
        region_lo,
        interior: lf,
        fiber: f,
        q,
        dplus,
        splus,
        sminus,
        deep_residual: deep,
        dropped,
        exact,
    })
}

/// `e_Q = [[S₊², S₊(1+S₊)Q], [S₋D⁺, 1 − S₋²]]`, stored as `e_Q − e₁`.
#[derive(Clone, Debug)]
pub struct CsProjector {
    /// `e_Q − e₁` restricted to region rows: `[f₁₁ f₁₂; f₂₁ f₂₂]` with
    /// region rows and all window columns in each block.
    pub blocks: [CMat; 4],
    pub idempotency: f64,
    /// `τ₀(e_Q − e₁)`.
    pub tau0: C64,
}

pub fn connes_skandalis_projector(par: &Parametrix) -> Result<CsProjector> {
    let n = par.q.nrows();
    let r = par.region();
    let rows = |m: &CMat| m.rows(r.start, r.len()).into_owned();
    let k = r.len();
    let region = |m: &CMat| m.view((r.start, r.start), (k, k)).into_owned();
    // S± vanish outside the region block
    let (sp, sm) = (region(&par.splus), region(&par.sminus));
    let (sp2, sm2) = (matmul(&sp, &sp), matmul(&sm, &sm));
    let widen = |m: &CMat| {
        let mut out = zeros(k, n);
        out.columns_mut(r.start, k).copy_from(m);
        out
    };
    let f11 = widen(&sp2);
    let f12 = matmul(&(&sp + &sp2), &rows(&par.q));
    let f21 = block_mul(&sm, &rows(&par.dplus), par.fiber);
    let f22 = -widen(&sm2);
    // every nonzero row of f lies in the region, so (f²)(i, j) only sums over region rows
    let f12r = f12.columns(r.start, k).into_owned();
    let f21r = f21.columns(r.start, k).into_owned();
    let g11 = widen(&matmul(&sp2, &sp2)) + block_mul(&f12r, &f21, par.fiber);
    let g12 = matmul(&sp2, &f12) - widen(&matmul(&f12r, &sm2));
    let g21 = widen(&matmul(&f21r, &sp2)) - block_mul(&sm2, &f21, par.fiber);
    let g22 = matmul(&f21r, &f12) + widen(&matmul(&sm2, &sm2));
    let res = max_abs(&(g11 - &f11)).max(max_abs(&g12)).max(max_abs(&g21)).max(max_abs(&(g22 + &f22)));
    let tau0 = trace(&sp2) - trace(&sm2);
    debug_assert_eq!(f11.ncols(), n);
    Ok(CsProjector { blocks: [f11, f12, f21, f22], idempotency: res, tau0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_has_exact_inverse() {
        let m = DiracModel::scalar(1.0, 1.0, 4.0, 0.5, 4, 20).unwrap();
        let p = aps_parametrix(&m, -2).unwrap();
        assert!(p.exact);
        assert!(max_abs(&p.splus) < 1e-10 && max_abs(&p.sminus) < 1e-10);
        let e = connes_skandalis_projector(&p).unwrap();
        assert!(e.tau0.norm() < 1e-10);
    }

    #[test]
    fn crossing_model_has_index_one() {
        let m = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 6, 40).unwrap();
        let p = aps_parametrix(&m, -2).unwrap();
        assert!((p.index() - c(1.0, 0.0)).norm() < 1e-6, "{}", p.index());
        let e = connes_skandalis_projector(&p).unwrap();
        assert!(e.idempotency < 1e-9, "{}", e.idempotency);
        assert!((e.tau0 - p.index()).norm() < 1e-12);
        let shifted = aps_parametrix(&m, -4).unwrap();
        assert!((shifted.index() - p.index()).norm() < 1e-6);
        let reversed = DiracModel::scalar(1.0, -1.0, 4.0, 0.5, 6, 40).unwrap();
        assert!((aps_parametrix(&reversed, -2).unwrap().index() + c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn gluing_must_lie_in_the_cylinder() {
        let m = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 6, 40).unwrap();
        assert!(aps_parametrix(&m, -1).is_err());
    }
}
