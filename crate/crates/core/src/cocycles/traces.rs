//! Traces, regularized traces and the degree-one cocycles of the cylinder.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::cocycles::Weight;
use crate::cyclic::{suspend, Cochain, CutOrder, SuspensionData};
use crate::geometry::GridGeometry;
use crate::kernel::{chi_commutator, CompactKernel, ExtendedKernel, InvariantKernel};
use crate::linalg::{c, trace, CMat, C64};
use crate::{Error, Result};

fn diag_sum(m: &CMat, geom: &GridGeometry, d: &[f64], from_slice: i64) -> C64 {
    let n_y = geom.n_y;
    let start = geom.offset(from_slice.max(geom.s_min()));
    (start..m.nrows()).map(|i| m[(i, i)] * d[i % n_y]).sum()
}

/// `τ₀(k) = Σ k(x, x) vol(x)`.
pub fn trace_tau0(k: &CompactKernel) -> C64 {
    let g = k.geometry();
    diag_sum(k.matrix(), g, &g.fiber_weights(), g.s_min())
}

/// `ω(k)` for a compact kernel.
pub fn weight_omega(k: &CompactKernel, w: &Weight) -> Result<C64> {
    let g = k.geometry();
    if w.len() != g.n_y {
        return Err(Error::Shape("weight and kernel fibers differ".into()));
    }
    Ok(diag_sum(k.matrix(), g, &w.fiber_diag(g.hs), g.s_min()))
}

/// `F(λ) = Σ_{s ≥ −λ} ω_s(k) − (λ + 1) ω_Y(ℓ(0))`.
pub fn regularized_weight_at(k: &ExtendedKernel, w: &Weight, lambda: usize) -> Result<C64> {
    let g = k.geometry();
    if w.len() != g.n_y {
        return Err(Error::Shape("weight and kernel fibers differ".into()));
    }
    if lambda > g.depth {
        return Err(Error::WindowTooSmall(format!("cut depth {lambda} beyond window depth {}", g.depth)));
    }
    let d = w.fiber_diag(g.hs);
    let l0 = k.tail().coeff(0);
    let boundary: C64 = (0..g.n_y).map(|y| l0[(y, y)] * d[y]).sum();
    Ok(diag_sum(k.matrix(), g, &d, -(lambda as i64)) - boundary * (lambda as f64 + 1.0))
}

/// Regularized weight `ω^r(k)`: `F(λ)` at the invariance depth, after
/// checking that the next increment vanishes exactly.
pub fn regularized_weight(k: &ExtendedKernel, w: &Weight) -> Result<C64> {
    let g = k.geometry();
    let lam = k.lambda();
    if lam + 1 > g.depth {
        return Err(Error::WindowTooSmall("no room to confirm stabilization".into()));
    }
    let d = w.fiber_diag(g.hs);
    let l0 = k.tail().coeff(0);
    let o = g.offset(-(lam as i64) - 1);
    let increment: C64 = (0..g.n_y).map(|y| (k.matrix()[(o + y, o + y)] - l0[(y, y)]) * d[y]).sum();
    if increment != c(0.0, 0.0) {
        return Err(Error::NotConverged(format!("regularized sum still moves by {increment} at depth {lam}")));
    }
    regularized_weight_at(k, w, lam)
}

/// `τ₀ʳ(k)`, the regularized trace for the grid volumes.
pub fn regularized_trace(k: &ExtendedKernel) -> Result<C64> {
    let w = Weight::full(k.geometry().vol_y.clone())?;
    regularized_weight(k, &w)
}

/// `σ₁^λ(ℓ₀, ℓ₁) = Tr(ℓ₀ [χ^λ, ℓ₁])` on the fixed window of `geom`.
pub fn roe_sigma1(l0: &InvariantKernel, l1: &InvariantKernel, lambda: usize, geom: &Arc<GridGeometry>) -> Result<C64> {
    let reach = (l0.radius() + l1.radius()) as i64;
    let cut = -(lambda as i64);
    if cut - 2 * reach < geom.s_min() || cut + 2 * reach > geom.s_max() {
        return Err(Error::WindowTooSmall(format!("cut at {cut} with reach {reach} leaves the window")));
    }
    let comm = chi_commutator(l1, lambda, geom.clone())?;
    let t0 = l0.toeplitz(geom);
    let w = geom.site_weights();
    let cm = comm.matrix();
    let mut acc = c(0.0, 0.0);
    for i in 0..cm.nrows() {
        let s = geom.slice_of(i);
        if (s - cut).abs() > reach {
            continue;
        }
        let mut row = c(0.0, 0.0);
        for j in 0..cm.nrows() {
            row += t0[(i, j)] * w[j] * cm[(j, i)];
        }
        acc += row * w[i];
    }
    Ok(acc)
}

/// `σ₁` as a suspension of the trace with the cutoff at depth `λ`.
pub fn roe_sigma1_cochain(fiber_weights: &[f64], lambda: usize) -> Cochain<InvariantKernel> {
    let data = SuspensionData {
        fiber_diag: fiber_weights.to_vec(),
        derivations: Vec::new(),
        lambda,
        order: CutOrder::ChiFirst,
    };
    suspend(data, "roe_sigma1")
}

/// `𝔰₁(ℓ₀, ℓ₁) = (i/2π) ∫₀^{2π} tr(∂_μ ℓ̂₀ ℓ̂₁) dμ`, integrated by the
/// trapezoid rule on more nodes than the total bandwidth, which is exact
/// for trigonometric polynomials.
pub fn melrose_s1(l0: &InvariantKernel, l1: &InvariantKernel) -> C64 {
    let n = 2 * (l0.radius() + l1.radius()) + 2;
    let mut acc = c(0.0, 0.0);
    for j in 0..n {
        let mu = 2.0 * PI * j as f64 / n as f64;
        acc += trace(&(l0.symbol_derivative(mu) * l1.symbol(mu)));
    }
    c(0.0, 1.0) * acc / n as f64
}

/// `Σ_n n · tr(ℓ₀(n) W ℓ₁(−n) W)`, the Fourier-coefficient form of `𝔰₁`.
pub fn melrose_s1_coefficients(l0: &InvariantKernel, l1: &InvariantKernel) -> C64 {
    let w = l0.weights();
    let r = l0.radius() as i64;
    let mut acc = c(0.0, 0.0);
    for n in -r..=r {
        let a = l0.coeff(n);
        let b = l1.coeff(-n);
        let mut t = c(0.0, 0.0);
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                t += a[(i, j)] * w[j] * b[(j, i)] * w[i];
            }
        }
        acc += t * n as f64;
    }
    acc
}

/// Finitely supported sequence `f(n)`, `n ∈ [offset, offset + len)`.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub offset: i64,
    pub values: Vec<C64>,
}

impl Sequence {
    fn get(&self, n: i64) -> C64 {
        let i = n - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            c(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    fn span(&self) -> i64 {
        self.offset.abs().max((self.offset + self.values.len() as i64 - 1).abs())
    }
}

/// `(1 − 2χ⁰) f`, with `χ⁰` the indicator of `n ≤ 0`.
pub fn reflect_by_cut(f: &Sequence) -> Sequence {
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| if f.offset + i as i64 <= 0 { -v } else { *v })
        .collect();
    Sequence { offset: f.offset, values }
}

fn grid_size(f: &Sequence) -> usize {
    2 * f.span() as usize + 4
}

/// Samples `f̂(μ) = Σ f(n) e^{−inμ}` on `N` equispaced nodes.
fn synthesize(f: &Sequence, n_nodes: usize) -> Vec<C64> {
    (0..n_nodes)
        .map(|j| {
            let mu = 2.0 * PI * j as f64 / n_nodes as f64;
            f.values.iter().enumerate().map(|(i, v)| v * C64::from_polar(1.0, -((f.offset + i as i64) as f64) * mu)).sum()
        })
        .collect()
}

/// Coefficients `n ∈ [−M, M]` of a sampled symbol.
fn analyze(g: &[C64], m: i64) -> Sequence {
    let n_nodes = g.len();
    let values = (-m..=m)
        .map(|n| {
            let s: C64 = g
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, (n as f64) * 2.0 * PI * j as f64 / n_nodes as f64))
                .sum();
            s / n_nodes as f64
        })
        .collect();
    Sequence { offset: -m, values }
}

/// Hilbert transform on the circle, `ℋ g = −i·conj(g) − mean(g)`, with the
/// periodic conjugate function computed by the discrete cotangent kernel.
pub fn hilbert_transform_samples(g: &[C64]) -> Vec<C64> {
    let n = g.len();
    let kernel: Vec<f64> = (0..n)
        .map(|j| if j % 2 == 1 { 2.0 / n as f64 / (PI * j as f64 / n as f64).tan() } else { 0.0 })
        .collect();
    let mean: C64 = g.iter().sum::<C64>() / n as f64;
    (0..n)
        .map(|i| {
            let conj: C64 = (0..n).map(|j| g[(i + n - j) % n] * kernel[j]).sum();
            c(0.0, -1.0) * conj - mean
        })
        .collect()
}

/// `‖(ℋ f̂)ˇ − (1 − 2χ⁰) f‖_∞`.
pub fn hilbert_identity_check(f: &Sequence) -> f64 {
    let n_nodes = grid_size(f);
    let h = hilbert_transform_samples(&synthesize(f, n_nodes));
    let got = analyze(&h, f.span());
    let want = reflect_by_cut(f);
    got.values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - want.get(got.offset + i as i64)).norm())
        .fold(0.0, f64::max)
}

/// Oracle: multiply the DFT coefficients by `sign(n)`, `sign(0) = −1`.
pub fn hilbert_multiplier_oracle(f: &Sequence) -> Sequence {
    let n_nodes = grid_size(f);
    let g = synthesize(f, n_nodes);
    let coeffs = analyze(&g, f.span());
    let values = coeffs
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| if coeffs.offset + i as i64 > 0 { *v } else { -v })
        .collect();
    Sequence { offset: coeffs.offset, values }
}
