//! Cylinder symbols, the projection path `p_t` and the transgression
//! integrand `t ↦ σ₁([ṗ_t, p_t], p_t)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::boundary::{spectral_gap_check, BoundaryOperator};
use super::model::TGrid;
use super::projections::{projection, projection_derivative, ProjectionKind};
use crate::cocycles::traces::{melrose_s1, roe_sigma1_cochain};
use crate::kernel::InvariantKernel;
use crate::linalg::{c, eye, max_abs, trace, zeros, CMat, HermEig, C64};
use crate::quadrature::bisection;
use crate::{par, Error, Result};

/// Coefficients below this are dropped from path kernels.
pub const KERNEL_TRUNCATION: f64 = 1e-14;

/// Frequency symbol `X(μ)` of a translation-invariant `D⁺`.
#[derive(Clone, Debug)]
pub enum Symbol {
    /// `X(μ) = Σ c(n) e^{−inμ}`, `μ ∈ [0, 2π)`.
    Lattice(BTreeMap<i64, CMat>),
    /// `X(μ) = iμ + A`, `μ ∈ ℝ`.
    Continuum(CMat),
}

impl Symbol {
    /// Forward difference `(u(s+1) − u(s))/h + A u(s)`.
    pub fn lattice_cylinder(a: &BoundaryOperator, h: f64) -> Self {
        let n = a.dim();
        let mut map = BTreeMap::new();
        map.insert(0, a.matrix() - eye(n) * c(1.0 / h, 0.0));
        map.insert(-1, eye(n) * c(1.0 / h, 0.0));
        Symbol::Lattice(map)
    }

    pub fn continuum(a: &BoundaryOperator) -> Self {
        Symbol::Continuum(a.matrix().clone())
    }

    pub fn dim(&self) -> usize {
        match self {
            Symbol::Lattice(m) => m.values().next().map_or(0, |b| b.nrows()),
            Symbol::Continuum(a) => a.nrows(),
        }
    }

    pub fn value(&self, mu: f64) -> CMat {
        match self {
            Symbol::Lattice(m) => {
                let mut out = zeros(self.dim(), self.dim());
                for (n, b) in m {
                    out += b * C64::from_polar(1.0, -(*n as f64) * mu);
                }
                out
            }
            Symbol::Continuum(a) => a + eye(a.nrows()) * c(0.0, mu),
        }
    }

    pub fn derivative(&self, mu: f64) -> CMat {
        match self {
            Symbol::Lattice(m) => {
                let mut out = zeros(self.dim(), self.dim());
                for (n, b) in m {
                    out += b * (C64::from_polar(1.0, -(*n as f64) * mu) * c(0.0, -(*n as f64)));
                }
                out
            }
            Symbol::Continuum(a) => eye(a.nrows()) * c(0.0, 1.0),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Symbol::Lattice(m) => Symbol::Lattice(m.iter().map(|(n, b)| (*n, b * c(s, 0.0))).collect()),
            Symbol::Continuum(a) => Symbol::Continuum(a * c(s, 0.0)),
        }
    }
}

/// `tr([ṗ, p] ∂_μ p)` at one frequency for `p = e(tX(μ))`.
fn integrand_density(symbol: &Symbol, kind: ProjectionKind, t: f64, mu: f64) -> Result<C64> {
    let x = symbol.value(mu);
    let tx = &x * c(t, 0.0);
    let p = projection(kind, &tx)?;
    let pdot = projection_derivative(kind, &tx, &x)?;
    let pmu = projection_derivative(kind, &tx, &(symbol.derivative(mu) * c(t, 0.0)))?;
    Ok(trace(&((&pdot * &p - &p * &pdot) * pmu)))
}

/// `−(i/2π) ∫ tr([ṗ_t, p_t] ∂_μ p_t) dμ` with analytic derivatives.
///
/// Lattice symbols use the trapezoid rule, doubled until two levels agree
/// to `1e−14` relative; continuum symbols are split over the eigenvalues of
/// `A` and use `μ = m sinh ξ` with adaptive Gauss quadrature.
pub fn transgression_integrand(symbol: &Symbol, kind: ProjectionKind, t: f64) -> Result<C64> {
    let pref = c(0.0, -1.0 / (2.0 * PI));
    match symbol {
        Symbol::Lattice(_) => {
            let mut n = 32usize;
            let mut prev: Option<C64> = None;
            let mut sums: Vec<C64> = Vec::new();
            loop {
                // reuse the previous level's nodes, evaluating only the new midpoints
                let fresh: Vec<Result<C64>> = if sums.is_empty() {
                    par::map_range(n, |j| integrand_density(symbol, kind, t, 2.0 * PI * j as f64 / n as f64))
                } else {
                    par::map_range(n / 2, |j| integrand_density(symbol, kind, t, 2.0 * PI * (2 * j + 1) as f64 / n as f64))
                };
                for v in fresh {
                    sums.push(v?);
                }
                let total: C64 = sums.iter().sum();
                let value = pref * total * (2.0 * PI / n as f64);
                if let Some(p) = prev {
                    if (value - p).norm() <= 1e-14 * (1.0 + value.norm()) {
                        return Ok(value);
                    }
                }
                if n >= 1 << 15 {
                    return Err(Error::NotConverged(format!("frequency sum at t = {t}")));
                }
                prev = Some(value);
                n *= 2;
            }
        }
        Symbol::Continuum(a) => {
            // iμ + A is diagonal in the eigenbasis of A, so the density is a
            // sum of scalar densities
            let mut total = C64::new(0.0, 0.0);
            for e in HermEig::new(a).values.iter() {
                total += scalar_continuum(*e, kind, t)?;
            }
            Ok(pref * total)
        }
    }
}

/// `∫ tr([ṗ, p] ∂_μ p) dμ` for the scalar symbol `iμ + a`.
fn scalar_continuum(a: f64, kind: ProjectionKind, t: f64) -> Result<C64> {
    // features sit at |μ| ~ 1/t and at |a|; μ = m sinh ξ resolves every
    // scale above m, and beyond |tμ| ~ 1e6 the density is negligible
    let symbol = Symbol::Continuum(CMat::from_element(1, 1, c(a, 0.0)));
    let margin = a.abs().max(1e-3);
    let m = (1.0 / t).min(margin);
    let xi = (1e6 * (1.0 / t).max(margin) / m).asinh();
    let f = |x: f64| -> Result<C64> { Ok(integrand_density(&symbol, kind, t, m * x.sinh())? * (m * x.cosh())) };
    Ok(bisection(&f, -xi, xi, 1e-13, 8, 1 << 12)?.value)
}

/// Fourier coefficients `x(n) = (1/N) Σ_j f(μ_j) e^{inμ_j}` of a symbol
/// `f(μ) = Σ x(n) e^{−inμ}`, on `N` nodes doubled until the upper quarter of
/// the spectrum is below `tol`. Coefficients below `tol` are dropped except
/// `x(0)`.
pub fn symbol_coefficients(dim: usize, tol: f64, f: &(dyn Fn(f64) -> Result<CMat> + Sync)) -> Result<BTreeMap<i64, CMat>> {
    let mut n = 64usize;
    loop {
        let samples: Vec<CMat> = par::map_range(n, |j| f(2.0 * PI * j as f64 / n as f64)).into_iter().collect::<Result<_>>()?;
        let half = (n / 2) as i64;
        let coeffs: Vec<(i64, CMat)> = par::map_range(n, |j| {
            let k = j as i64 - half + 1;
            let mut acc = zeros(dim, dim);
            for (m, s) in samples.iter().enumerate() {
                acc += s * C64::from_polar(1.0, 2.0 * PI * (k * m as i64).rem_euclid(n as i64) as f64 / n as f64);
            }
            (k, acc / c(n as f64, 0.0))
        });
        let tail = coeffs.iter().filter(|(k, _)| k.abs() > half / 2).map(|(_, m)| max_abs(m)).fold(0.0, f64::max);
        if tail <= tol {
            return Ok(coeffs.into_iter().filter(|(k, m)| *k == 0 || max_abs(m) > tol).collect());
        }
        if n >= 1 << 14 {
            return Err(Error::NotConverged("symbol coefficients do not decay".into()));
        }
        n *= 2;
    }
}

/// Band kernel with symbol `f` on `dim` fiber sites of weight `h`.
pub fn kernel_from_symbol(dim: usize, h: f64, f: &(dyn Fn(f64) -> Result<CMat> + Sync)) -> Result<InvariantKernel> {
    let map = symbol_coefficients(dim, KERNEL_TRUNCATION, f)?;
    InvariantKernel::new(vec![h; dim], map.into_iter().map(|(k, m)| (k, m / c(h, 0.0))).collect())
}

/// One time sample of a projection path.
#[derive(Clone, Debug)]
pub struct PathSample {
    pub t: f64,
    pub p: InvariantKernel,
    pub pdot: InvariantKernel,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleDiagnostics {
    pub t: f64,
    pub bandwidth: usize,
    pub idempotency: f64,
    /// `‖p ṗ p‖`, zero for a path of projections.
    pub pdp: f64,
    pub commutator: f64,
    pub integrand_symbol: f64,
    pub integrand_roe: f64,
    pub integrand_melrose: f64,
}

/// `p_t = e(tX)` and `ṗ_t` as band kernels on the doubled fiber.
#[derive(Clone, Debug)]
pub struct ProjectionPath {
    pub kind: ProjectionKind,
    pub symbol: Symbol,
    pub h: f64,
    pub samples: Vec<PathSample>,
}

impl ProjectionPath {
    pub fn from_symbol(symbol: &Symbol, h: f64, kind: ProjectionKind, ts: &[f64]) -> Result<Self> {
        if !matches!(symbol, Symbol::Lattice(_)) {
            return Err(Error::Invariant("band kernels need a lattice symbol".into()));
        }
        let dim = 2 * symbol.dim();
        let samples = ts
            .iter()
            .map(|&t| {
                let p = kernel_from_symbol(dim, h, &|mu| projection(kind, &(symbol.value(mu) * c(t, 0.0))))?;
                let pdot = kernel_from_symbol(dim, h, &|mu| {
                    let x = symbol.value(mu);
                    projection_derivative(kind, &(&x * c(t, 0.0)), &x)
                })?;
                Ok(PathSample { t, p, pdot })
            })
            .collect::<Result<_>>()?;
        Ok(ProjectionPath { kind, symbol: symbol.clone(), h, samples })
    }

    /// `[ṗ_t, p_t]` as a kernel.
    pub fn commutator(&self, i: usize) -> Result<InvariantKernel> {
        let s = &self.samples[i];
        s.pdot.convolve(&s.p)?.sub(&s.p.convolve(&s.pdot)?)
    }

    /// `σ₁([ṗ, p], p)` through the cutoff trace of the kernels.
    pub fn integrand_roe(&self, i: usize) -> Result<C64> {
        let s = &self.samples[i];
        roe_sigma1_cochain(s.p.weights(), 0).eval(&[self.commutator(i)?, s.p.clone()])
    }

    /// `𝔰₁([ṗ, p], p)` from the truncated kernels.
    pub fn integrand_melrose(&self, i: usize) -> Result<C64> {
        Ok(melrose_s1(&self.commutator(i)?, &self.samples[i].p))
    }

    pub fn integrand_symbol(&self, i: usize) -> Result<C64> {
        transgression_integrand(&self.symbol, self.kind, self.samples[i].t)
    }

    pub fn diagnostics(&self, i: usize) -> Result<SampleDiagnostics> {
        let s = &self.samples[i];
        let pp = s.p.convolve(&s.p)?;
        let pdp = s.p.convolve(&s.pdot)?.convolve(&s.p)?;
        let zero = InvariantKernel::zero(s.p.weights().to_vec());
        Ok(SampleDiagnostics {
            t: s.t,
            bandwidth: s.p.radius().max(s.pdot.radius()),
            idempotency: pp.max_abs_diff(&s.p),
            pdp: pdp.max_abs_diff(&zero),
            commutator: self.commutator(i)?.max_abs_diff(&zero),
            integrand_symbol: self.integrand_symbol(i)?.re,
            integrand_roe: self.integrand_roe(i)?.re,
            integrand_melrose: self.integrand_melrose(i)?.re,
        })
    }

    /// Largest off-diagonal block entry of `p` at the last sample, which
    /// tends to zero as `t → ∞`.
    pub fn end_off_diagonal(&self) -> f64 {
        let p = &self.samples.last().expect("non-empty path").p;
        let m = p.n_y() / 2;
        p.offsets()
            .map(|n| {
                let b = p.coeff(n);
                max_abs(&b.view((0, m), (m, m)).into_owned()).max(max_abs(&b.view((m, 0), (m, m)).into_owned()))
            })
            .fold(0.0, f64::max)
    }
}

/// Path of the forward-difference cylinder `∂_s + A`, refused without a gap.
pub fn cylinder_projection_path(a: &BoundaryOperator, h: f64, kind: ProjectionKind, tgrid: &TGrid, eps: f64) -> Result<ProjectionPath> {
    let gap = spectral_gap_check(a, eps);
    if !gap.ok {
        return Err(Error::Gap(format!("margin {} below {eps}", gap.margin)));
    }
    tgrid.validate()?;
    ProjectionPath::from_symbol(&Symbol::lattice_cylinder(a, h), h, kind, &tgrid.samples())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_graph_projection_closed_form() {
        // one frequency, X = a: p₁₁ = 1/(1+t²a²), p₁₂ = ta/(1+t²a²)
        let a = 0.7;
        for t in [0.1, 1.0, 3.0] {
            let p = projection(ProjectionKind::Graph, &CMat::from_element(1, 1, c(t * a, 0.0))).unwrap();
            let d = 1.0 + t * t * a * a;
            assert!((p[(0, 0)].re - 1.0 / d).abs() < 1e-15);
            assert!((p[(0, 1)].re - t * a / d).abs() < 1e-15);
            let w = projection(ProjectionKind::Wassermann, &CMat::from_element(1, 1, c(t * a, 0.0))).unwrap();
            let x = t * t * a * a;
            assert!((w[(0, 0)].re - (-x).exp()).abs() < 1e-15);
            assert!((w[(0, 1)].re - ((-x).exp() * (1.0 - (-x).exp())).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn path_samples_are_projections() {
        let a = BoundaryOperator::scalar(1.0);
        let grid = TGrid { t_min: 0.5, t_max: 8.0, points: 3 };
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let path = cylinder_projection_path(&a, 0.5, kind, &grid, 0.1).unwrap();
            for i in 0..path.samples.len() {
                let d = path.diagnostics(i).unwrap();
                assert!(d.idempotency < 1e-10, "{kind:?} {d:?}");
                assert!(d.pdp < 1e-10, "{kind:?} {d:?}");
                assert!((d.integrand_symbol - d.integrand_roe).abs() < 1e-10, "{kind:?} {d:?}");
                assert!((d.integrand_symbol - d.integrand_melrose).abs() < 1e-10, "{kind:?} {d:?}");
            }
        }
        assert!(cylinder_projection_path(&BoundaryOperator::scalar(0.0), 0.5, ProjectionKind::Graph, &grid, 0.1).is_err());
    }

    #[test]
    fn continuum_integrand_is_odd_in_a() {
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let ip = transgression_integrand(&Symbol::continuum(&BoundaryOperator::scalar(1.3)), kind, 0.8).unwrap();
            let im = transgression_integrand(&Symbol::continuum(&BoundaryOperator::scalar(-1.3)), kind, 0.8).unwrap();
            assert!((ip + im).norm() < 1e-12, "{ip} {im}");
            assert!(ip.im.abs() < 1e-12);
        }
    }

    #[test]
    fn continuum_integrand_closed_forms() {
        // graph: −a/(2(1+t²a²)^{3/2});  heat: −(a/√π) e^{−t²a²}
        for a in [0.6, 1.0, -2.5] {
            let sym = Symbol::continuum(&BoundaryOperator::scalar(a));
            for t in [0.05, 0.7, 2.0] {
                let g = transgression_integrand(&sym, ProjectionKind::Graph, t).unwrap();
                let w = transgression_integrand(&sym, ProjectionKind::Wassermann, t).unwrap();
                let g_want = -a / (2.0 * (1.0 + t * t * a * a).powf(1.5));
                let w_want = -a / PI.sqrt() * (-t * t * a * a).exp();
                assert!((g.re - g_want).abs() < 1e-12, "{a} {t} {g} {g_want}");
                assert!((w.re - w_want).abs() < 1e-12, "{a} {t} {w} {w_want}");
            }
        }
    }
}
