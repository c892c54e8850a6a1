//! Folded lattice models `D⁺ = ∂_s + A(s)` with
//! `A(p) = B + (a₋ + (a₊ − a₋) h(p/L')) · 1` on the line `p ∈ ℤ`,
//! constant outside `[0, L']`.
//!
//! The line is folded at `L' = 2L + 1`: slice `s ≤ L` carries the upper
//! branch `p = s` and the lower branch `p = L' − s`, so both ends become one
//! cylinder `s ≤ 0` with boundary operator `A₋ ⊕ A₊`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::boundary::{circle_dirac, spectral_gap_check, BoundaryOperator};
use super::path::Symbol;
use super::projections::ProjectionKind;
use crate::geometry::GridGeometry;
use crate::linalg::{c, eye, hermitian_defect, max_abs, zeros, CMat, HermEig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Constant,
    TanhCrossing,
    CircleDiracWithTwist,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Constant, Preset::TanhCrossing, Preset::CircleDiracWithTwist];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Constant => "constant",
            Preset::TanhCrossing => "tanh-crossing",
            Preset::CircleDiracWithTwist => "circle-dirac-with-twist",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown preset {s:?}")))
    }
}

/// Geometric time grid `t_min · r^j`, `j = 0..points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) || self.points < 2 {
            return Err(Error::Parse(format!("invalid time grid {self:?}")));
        }
        Ok(())
    }

    pub fn samples(&self) -> Vec<f64> {
        let r = (self.t_max / self.t_min).ln() / (self.points - 1) as f64;
        (0..self.points).map(|j| self.t_min * (r * j as f64).exp()).collect()
    }
}

/// Everything needed to build a [`DiracModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub preset: Preset,
    /// Circle points of the base operator; 1 means a scalar model.
    pub n_circle: usize,
    pub a_minus: f64,
    pub a_plus: f64,
    /// Steepness of the tanh profile.
    pub kappa: f64,
    /// Slice step.
    pub h: f64,
    /// Interior slices `L` of the folded model.
    pub interior: usize,
    /// Cylinder slices kept in windowed computations.
    pub window: usize,
    /// Required spectral gap of the boundary operators.
    pub eps: f64,
    /// Overall factor `D ↦ sD`.
    pub scale: f64,
    pub kind: ProjectionKind,
    pub tgrid: TGrid,
}

impl ModelSpec {
    pub fn preset(p: Preset) -> Self {
        let tgrid = TGrid { t_min: 0.05, t_max: 50.0, points: 13 };
        let base = ModelSpec {
            preset: p,
            n_circle: 1,
            a_minus: 1.0,
            a_plus: 1.0,
            kappa: 4.0,
            h: 0.5,
            interior: 6,
            window: 40,
            eps: 0.25,
            scale: 1.0,
            kind: ProjectionKind::Graph,
            tgrid,
        };
        match p {
            Preset::Constant => base,
            Preset::TanhCrossing => ModelSpec { a_minus: -1.0, ..base },
            Preset::CircleDiracWithTwist => ModelSpec {
                n_circle: 16,
                a_minus: -0.5,
                a_plus: 0.5,
                h: 0.2,
                window: 60,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("kappa", self.kappa), ("h", self.h), ("eps", self.eps), ("scale", self.scale)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.a_minus.is_finite() || !self.a_plus.is_finite() {
            return Err(Error::Parse("profile endpoints must be finite".into()));
        }
        if self.n_circle == 0 || self.interior == 0 || self.window < 4 {
            return Err(Error::Parse("n_circle, interior must be ≥ 1 and window ≥ 4".into()));
        }
        if self.preset != Preset::CircleDiracWithTwist && self.n_circle != 1 {
            return Err(Error::Parse("scalar presets need n_circle = 1".into()));
        }
        self.tgrid.validate()
    }
}

/// `h(u)`: smooth monotone step from 0 at `u = 0` to 1 at `u = 1`.
pub(crate) fn tanh_step(u: f64, kappa: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let t = (kappa / 2.0).tanh();
    ((kappa * (u - 0.5)).tanh() + t) / (2.0 * t)
}

/// Folded lattice Dirac operator; see the module docs.
#[derive(Clone, Debug)]
pub struct DiracModel {
    base: CMat,
    a_minus: f64,
    a_plus: f64,
    kappa: f64,
    h: f64,
    interior: i64,
    window: usize,
    scale: f64,
}

impl DiracModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let base = match spec.preset {
            Preset::CircleDiracWithTwist => circle_dirac(spec.n_circle, 0.0).matrix().clone(),
            _ => zeros(1, 1),
        };
        let a_minus = if spec.preset == Preset::Constant { spec.a_plus } else { spec.a_minus };
        let m = Self::new(base, a_minus, spec.a_plus, spec.kappa, spec.h, spec.interior, spec.window)?.scaled(spec.scale);
        m.check_gap(spec.eps)?;
        Ok(m)
    }

    pub fn new(base: CMat, a_minus: f64, a_plus: f64, kappa: f64, h: f64, interior: usize, window: usize) -> Result<Self> {
        if hermitian_defect(&base) > 1e-13 {
            return Err(Error::Invariant("base operator must be Hermitian".into()));
        }
        if interior == 0 || !(h > 0.0) {
            return Err(Error::Invariant("need interior ≥ 1 and h > 0".into()));
        }
        Ok(DiracModel { base, a_minus, a_plus, kappa, h, interior: interior as i64, window, scale: 1.0 })
    }

    /// Scalar model on the line.
    pub fn scalar(a_minus: f64, a_plus: f64, kappa: f64, h: f64, interior: usize, window: usize) -> Result<Self> {
        Self::new(zeros(1, 1), a_minus, a_plus, kappa, h, interior, window)
    }

    /// `sD` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        DiracModel { scale: self.scale * s, ..self.clone() }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interior(&self) -> i64 {
        self.interior
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn with_window(&self, window: usize) -> Self {
        DiracModel { window, ..self.clone() }
    }

    /// Boundary dimension `n`; the folded fiber has `2n` sites.
    pub fn n(&self) -> usize {
        self.base.nrows()
    }

    pub fn fiber_dim(&self) -> usize {
        2 * self.n()
    }

    /// `L' = 2L + 1`.
    pub fn line_length(&self) -> i64 {
        2 * self.interior + 1
    }

    pub fn is_constant(&self) -> bool {
        self.a_minus == self.a_plus
    }

    /// `A` at a continuous line position `p` (unscaled).
    pub fn profile(&self, p: f64) -> CMat {
        let v = self.a_minus + (self.a_plus - self.a_minus) * tanh_step(p / self.line_length() as f64, self.kappa);
        &self.base + eye(self.n()) * c(v, 0.0)
    }

    pub fn a_minus(&self) -> BoundaryOperator {
        BoundaryOperator::new(self.profile(-1.0)).expect("Hermitian").scaled(self.scale)
    }

    pub fn a_plus(&self) -> BoundaryOperator {
        BoundaryOperator::new(self.profile(self.line_length() as f64 + 1.0)).expect("Hermitian").scaled(self.scale)
    }

    /// Boundary operator of the folded cylinder, `A₋ ⊕ A₊`.
    pub fn boundary(&self) -> BoundaryOperator {
        self.a_minus().direct_sum(&self.a_plus())
    }

    /// Checks the gap of `A₋ ⊕ A₊` and that no eigenvalue reaches the
    /// lattice doubler at `2/h`, where the forward difference loses its
    /// winding.
    pub fn check_gap(&self, eps: f64) -> Result<()> {
        let b = self.boundary();
        let gap = spectral_gap_check(&b, eps * self.scale);
        if !gap.ok {
            return Err(Error::Gap(format!("boundary margin {} below {}", gap.margin, eps * self.scale)));
        }
        let top = 2.0 * self.scale / self.h;
        let worst = b.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max);
        if worst > top - eps * self.scale {
            return Err(Error::Gap(format!("boundary eigenvalue {worst} too close to the lattice doubler {top}")));
        }
        Ok(())
    }

    fn interleave(&self, upper: &CMat, lower: &CMat) -> CMat {
        let n = self.n();
        let mut out = zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(upper);
        out.view_mut((n, n), (n, n)).copy_from(lower);
        out
    }

    /// Block `D⁺(s, s')` of the folded operator, for `s, s' ≤ L`.
    pub fn block(&self, s: i64, sp: i64) -> CMat {
        let n = self.n();
        let inv_h = c(1.0 / self.h, 0.0);
        let id = eye(n);
        let mut out = zeros(2 * n, 2 * n);
        if s == sp {
            let upper = self.profile(s as f64) - &id * inv_h;
            let lower = self.profile((self.line_length() - s) as f64) - &id * inv_h;
            out = self.interleave(&upper, &lower);
            if s == self.interior {
                out.view_mut((0, n), (n, n)).copy_from(&(&id * inv_h));
            }
        } else if sp == s + 1 && s < self.interior {
            out.view_mut((0, 0), (n, n)).copy_from(&(&id * inv_h));
        } else if sp == s - 1 {
            out.view_mut((n, n), (n, n)).copy_from(&(&id * inv_h));
        }
        out * c(self.scale, 0.0)
    }

    /// Dense `D⁺` compressed to slices `[lo, L]` in an orthonormal basis.
    pub fn dense(&self, lo: i64) -> CMat {
        let f = self.fiber_dim();
        let ns = (self.interior - lo + 1) as usize;
        let mut out = zeros(ns * f, ns * f);
        for i in 0..ns {
            for j in i.saturating_sub(1)..(i + 2).min(ns) {
                let b = self.block(lo + i as i64, lo + j as i64);
                out.view_mut((i * f, j * f), (f, f)).copy_from(&b);
            }
        }
        out
    }

    /// Cylinder coefficients `c(n)`, `D⁺(s, s') = c(s − s')` for `s, s' ≤ 0`.
    pub fn cylinder_coefficients(&self) -> BTreeMap<i64, CMat> {
        [-1, 0, 1].into_iter().map(|n| (n, self.block(-10 + n, -10))).collect()
    }

    /// Symbol `X(μ) = Σ c(n) e^{−inμ}` of the folded cylinder.
    pub fn symbol(&self) -> Symbol {
        Symbol::Lattice(self.cylinder_coefficients())
    }

    /// Grid with the folded fiber and unit fiber volumes.
    pub fn geometry(&self) -> Result<GridGeometry> {
        let f = self.fiber_dim();
        GridGeometry::new(f, self.window, self.interior as usize, 1, 1, self.h, vec![1.0; f])
    }

    /// Splits a model whose base is not scalar into the scalar models of
    /// the base eigenmodes. The profile is `B + v(p)`, so the split is
    /// exact; diagonality of `A₋` and `A₊` in the mode basis is checked.
    pub fn modes(&self) -> Result<Vec<DiracModel>> {
        if self.n() == 1 {
            return Ok(vec![self.clone()]);
        }
        let eig = HermEig::new(&self.base);
        let v = &eig.vectors;
        for a in [self.profile(-1.0), self.profile(self.line_length() as f64 + 1.0)] {
            let d = v.adjoint() * &a * v;
            let mut off = d.clone();
            off.fill_diagonal(c(0.0, 0.0));
            if max_abs(&off) > 1e-12 {
                return Err(Error::Numerical(format!("mode split leaves off-diagonal {:e}", max_abs(&off))));
            }
        }
        Ok(eig
            .values
            .iter()
            .map(|&e| DiracModel { base: CMat::from_element(1, 1, c(e, 0.0)), ..self.clone() })
            .collect())
    }

    /// `p ↦ A(p)` scaled, on `p ∈ [0, L']`, for spectral flow.
    pub fn profile_family(&self) -> impl Fn(f64) -> CMat + '_ {
        move |p| self.profile(p) * c(self.scale, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_names() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            ModelSpec::preset(p).validate().unwrap();
            DiracModel::from_spec(&ModelSpec::preset(p)).unwrap();
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn folded_operator_is_unfolded_line_operator() {
        let m = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 3, 8).unwrap();
        let lo = -5;
        let d = m.dense(lo);
        let lp = m.line_length();
        // line sites p ∈ [lo, lp − lo]; folded index of p
        let site = |p: i64| -> usize {
            if p <= m.interior() {
                ((p - lo) * 2) as usize
            } else {
                ((lp - p - lo) * 2 + 1) as usize
            }
        };
        for p in lo..=(lp - lo) {
            let a = m.profile(p as f64)[(0, 0)].re;
            assert!((d[(site(p), site(p))].re - (a - 2.0)).abs() < 1e-15);
            if p < lp - lo {
                assert!((d[(site(p), site(p + 1))].re - 2.0).abs() < 1e-15);
            }
        }
        let nnz = d.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nnz as i64, 2 * (lp - 2 * lo + 1) - 1);
    }

    #[test]
    fn tanh_step_is_monotone_and_clamped() {
        assert_eq!(tanh_step(-0.1, 4.0), 0.0);
        assert_eq!(tanh_step(1.2, 4.0), 1.0);
        assert!(tanh_step(0.0, 4.0).abs() < 1e-15 && (tanh_step(1.0, 4.0) - 1.0).abs() < 1e-15);
        assert!((tanh_step(0.5, 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn circle_modes_split() {
        let m = DiracModel::from_spec(&ModelSpec::preset(Preset::CircleDiracWithTwist)).unwrap();
        let modes = m.modes().unwrap();
        assert_eq!(modes.len(), 16);
        let mut ends: Vec<f64> = modes.iter().map(|x| x.a_minus().eigenvalues()[0]).collect();
        ends.sort_by(f64::total_cmp);
        for (k, e) in ends.iter().enumerate() {
            assert!((e - (k as f64 - 7.0 - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_failures_are_reported() {
        let spec = ModelSpec { a_plus: 0.1, ..ModelSpec::preset(Preset::TanhCrossing) };
        assert!(matches!(DiracModel::from_spec(&spec), Err(Error::Gap(_))));
        let spec = ModelSpec { a_plus: 3.9, ..ModelSpec::preset(Preset::TanhCrossing) };
        assert!(matches!(DiracModel::from_spec(&spec), Err(Error::Gap(_))));
    }
}
