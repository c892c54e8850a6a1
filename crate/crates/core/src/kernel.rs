//! Kernel algebras of the discrete cylinder.
//!
//! Everything is in the kernel picture: an operator is a matrix `k` over
//! sites, products carry the site measure, `(ab)(x, x'') = Σ a(x,x') vol(x')
//! b(x',x'')`, and the trace is `Σ k(x,x) vol(x)`.
//!
//! * [`InvariantKernel`]: translation-invariant band kernels `ℓ(s − s')` on the
//!   bi-infinite cylinder, stored as `n_y × n_y` blocks `ℓ(n)`, `|n| ≤ w`.
//! * [`ExtendedKernel`]: operators on `(−∞, L] × Y`, stored on the window
//!   `[−S, L]` together with their tail `ℓ = π(k)` and an invariance depth
//!   `λ`: every entry with `min(s, s') ≤ −λ` equals `ℓ(s − s')`. The window
//!   matrix therefore determines the infinite operator exactly.
//! * [`CompactKernel`]: the ideal; entries vanish on every slice deeper than
//!   `−(λ₀ + w)`, which keeps window products exact.
//!
//! The maps of the extension are [`project_pi`], [`section_s`] (compression
//! `χ⁰ ℓ χ⁰` to `s ≤ 0`) and [`section_t`] (`k − s(π k)`), together with the
//! cutoff commutators [`chi_commutator`].

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::GridGeometry;
use crate::linalg::{c, max_abs, weighted_block_mul, zeros, CMat, C64};
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

fn same_weights(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

/// Scales column `j` of `m` by `w[j % w.len()]`.
fn scale_columns(m: &CMat, w: &[f64]) -> CMat {
    let mut out = m.clone();
    let n = w.len();
    for j in 0..out.ncols() {
        out.column_mut(j).scale_mut(w[j % n]);
    }
    out
}

/// Translation-invariant band kernel `ℓ(n)`, `n ∈ [−w, w]`.
#[derive(Clone, Debug)]
pub struct InvariantKernel {
    weights: Arc<Vec<f64>>,
    w: usize,
    blocks: Vec<CMat>,
}

impl PartialEq for InvariantKernel {
    fn eq(&self, other: &Self) -> bool {
        if !same_weights(&self.weights, &other.weights) {
            return false;
        }
        let r = self.width().max(other.width()) as i64;
        (-r..=r).all(|n| self.coeff(n) == other.coeff(n))
    }
}

impl InvariantKernel {
    /// Builds a kernel from blocks keyed by offset. `weights` is the slice
    /// measure `hs · vol_y` of the fiber.
    pub fn new(weights: Vec<f64>, blocks: BTreeMap<i64, CMat>) -> Result<Self> {
        let n_y = weights.len();
        let w = blocks.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = vec![zeros(n_y, n_y); 2 * w + 1];
        for (n, b) in blocks {
            if b.shape() != (n_y, n_y) {
                return Err(Error::Shape(format!("block {n} has shape {:?}, fiber is {n_y}", b.shape())));
            }
            out[(n + w as i64) as usize] = b;
        }
        Ok(InvariantKernel { weights: Arc::new(weights), w, blocks: out })
    }

    pub fn from_fn(weights: Vec<f64>, w: usize, mut f: impl FnMut(i64) -> CMat) -> Result<Self> {
        let map = (-(w as i64)..=w as i64).map(|n| (n, f(n))).collect();
        Self::new(weights, map)
    }

    pub fn zero(weights: Vec<f64>) -> Self {
        let n = weights.len();
        InvariantKernel { weights: Arc::new(weights), w: 0, blocks: vec![zeros(n, n)] }
    }

    /// The unit of the convolution algebra: `ℓ(0) = W^{-1}`.
    pub fn identity(weights: Vec<f64>) -> Self {
        let d: Vec<f64> = weights.iter().map(|x| 1.0 / x).collect();
        let b = crate::linalg::diag_real(&d);
        InvariantKernel { weights: Arc::new(weights), w: 0, blocks: vec![b] }
    }

    /// Kernel with `ℓ(k) = 1` (identity block) and all other blocks zero.
    pub fn shift(weights: Vec<f64>, k: i64) -> Self {
        let n = weights.len();
        let mut map = BTreeMap::new();
        map.insert(k, crate::linalg::eye(n));
        Self::new(weights, map).expect("identity block has fiber shape")
    }

    pub fn n_y(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Storage half-width; blocks outside it are zero.
    pub fn width(&self) -> usize {
        self.w
    }

    /// Largest `|n|` with a nonzero block.
    pub fn radius(&self) -> usize {
        (0..=self.w)
            .rev()
            .find(|&r| {
                let r = r as i64;
                self.block(r).iter().any(|z| *z != ZERO) || self.block(-r).iter().any(|z| *z != ZERO)
            })
            .unwrap_or(0)
    }

    fn block(&self, n: i64) -> &CMat {
        &self.blocks[(n + self.w as i64) as usize]
    }

    /// `ℓ(n)`, zero outside the stored range.
    pub fn coeff(&self, n: i64) -> CMat {
        if n.unsigned_abs() as usize > self.w {
            zeros(self.n_y(), self.n_y())
        } else {
            self.block(n).clone()
        }
    }

    pub fn coeff_ref(&self, n: i64) -> Option<&CMat> {
        (n.unsigned_abs() as usize <= self.w).then(|| self.block(n))
    }

    pub fn offsets(&self) -> impl Iterator<Item = i64> {
        -(self.w as i64)..=self.w as i64
    }

    /// Drops zero blocks at the ends.
    pub fn trimmed(&self) -> Self {
        let r = self.radius();
        let map = (-(r as i64)..=r as i64).map(|n| (n, self.coeff(n))).collect();
        Self::new(self.weights.to_vec(), map).expect("shapes preserved")
    }

    /// Drops the outer blocks whose entries are all at most `tol`.
    pub fn truncated(&self, tol: f64) -> Self {
        let r = self.offsets().filter(|&n| max_abs(&self.coeff(n)) > tol).map(|n| n.unsigned_abs()).max().unwrap_or(0) as i64;
        let map = (-r..=r).map(|n| (n, self.coeff(n))).collect();
        Self::new(self.weights.to_vec(), map).expect("shapes preserved")
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_weights(&self.weights, &other.weights) {
            return Err(Error::Shape("invariant kernels on different fibers".into()));
        }
        Ok(())
    }

    /// `(ℓ * ℓ')(n) = Σ_m ℓ(m) W ℓ'(n − m)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let (wa, wb) = (self.radius() as i64, other.radius() as i64);
        let w = wa + wb;
        let n_y = self.n_y();
        let mut out = vec![zeros(n_y, n_y); (2 * w + 1) as usize];
        for m in -wa..=wa {
            let lw = scale_columns(self.block(m), &self.weights);
            for k in -wb..=wb {
                out[(m + k + w) as usize] += &lw * other.block(k);
            }
        }
        Ok(InvariantKernel { weights: self.weights.clone(), w: w as usize, blocks: out })
    }

    /// `ℓ*(n) = ℓ(−n)†`.
    pub fn adjoint(&self) -> Self {
        let w = self.w as i64;
        let blocks = (-w..=w).map(|n| self.block(-n).adjoint()).collect();
        InvariantKernel { weights: self.weights.clone(), w: self.w, blocks }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.check_compatible(other)?;
        let w = self.w.max(other.w) as i64;
        let map = (-w..=w).map(|n| (n, f(&self.coeff(n), &other.coeff(n)))).collect();
        Self::new(self.weights.to_vec(), map)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> Self {
        let blocks = self.blocks.iter().map(|b| b * z).collect();
        InvariantKernel { weights: self.weights.clone(), w: self.w, blocks }
    }

    /// `ℓ̂(μ) = Σ_n ℓ(n) W e^{−inμ}`.
    pub fn symbol(&self, mu: f64) -> CMat {
        let mut out = zeros(self.n_y(), self.n_y());
        for n in self.offsets() {
            out += scale_columns(self.block(n), &self.weights) * C64::from_polar(1.0, -(n as f64) * mu);
        }
        out
    }

    /// `∂_μ ℓ̂(μ)`.
    pub fn symbol_derivative(&self, mu: f64) -> CMat {
        let mut out = zeros(self.n_y(), self.n_y());
        for n in self.offsets() {
            let ph = C64::from_polar(1.0, -(n as f64) * mu) * c(0.0, -(n as f64));
            out += scale_columns(self.block(n), &self.weights) * ph;
        }
        out
    }

    /// `[φ, ℓ]` for a fiber multiplier `φ`.
    pub fn fiber_commutator(&self, phi: &[C64]) -> Result<Self> {
        if phi.len() != self.n_y() {
            return Err(Error::Shape("multiplier length differs from fiber".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| CMat::from_fn(b.nrows(), b.ncols(), |i, j| (phi[i] - phi[j]) * b[(i, j)]))
            .collect();
        Ok(InvariantKernel { weights: self.weights.clone(), w: self.w, blocks })
    }

    /// Dense matrix of `ℓ` restricted to slices `[lo, hi]`.
    pub fn dense(&self, lo: i64, hi: i64) -> CMat {
        let n_y = self.n_y();
        let ns = (hi - lo + 1).max(0) as usize;
        let mut out = zeros(ns * n_y, ns * n_y);
        let w = self.w as i64;
        for i in 0..ns {
            for j in 0..ns {
                let n = i as i64 - j as i64;
                if n.abs() <= w {
                    out.view_mut((i * n_y, j * n_y), (n_y, n_y)).copy_from(self.block(n));
                }
            }
        }
        out
    }

    /// `T(ℓ)` on the whole window of `geom`.
    pub fn toeplitz(&self, geom: &GridGeometry) -> CMat {
        self.dense(geom.s_min(), geom.s_max())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let w = self.w.max(other.w) as i64;
        (-w..=w).map(|n| max_abs(&(self.coeff(n) - other.coeff(n)))).fold(0.0, f64::max)
    }
}

/// A complex site function, translation invariant on slices `s ≤ −λ`.
///
/// Represents `φ`, `φ̇`, cutoffs `χ^λ` and Alexander-Spanier functions.
#[derive(Clone, Debug)]
pub struct Multiplier {
    geom: Arc<GridGeometry>,
    values: Vec<C64>,
    lambda: usize,
}

impl Multiplier {
    pub fn new(geom: Arc<GridGeometry>, values: Vec<C64>, lambda: usize) -> Result<Self> {
        if values.len() != geom.dim() {
            return Err(Error::Shape(format!("multiplier has {} values for {} sites", values.len(), geom.dim())));
        }
        if lambda > geom.depth {
            return Err(Error::WindowTooSmall(format!("multiplier depth {lambda} beyond window")));
        }
        let n_y = geom.n_y;
        for s in geom.s_min()..=-(lambda as i64) {
            let o = geom.offset(s);
            if values[o..o + n_y] != values[..n_y] {
                return Err(Error::Invariant(format!("multiplier not translation invariant at slice {s}")));
            }
        }
        Ok(Multiplier { geom, values, lambda })
    }

    /// `φ(s, y) = cyl[y]` on every slice.
    pub fn invariant(geom: Arc<GridGeometry>, cyl: &[C64]) -> Result<Self> {
        let n = geom.n_slices();
        let values = (0..n).flat_map(|_| cyl.iter().cloned()).collect();
        Self::new(geom, values, 0)
    }

    /// Indicator `χ^λ` of slices `s ≤ −λ`.
    pub fn chi(geom: Arc<GridGeometry>, lambda: usize) -> Result<Self> {
        let values = (0..geom.dim())
            .map(|i| if geom.slice_of(i) <= -(lambda as i64) { c(1.0, 0.0) } else { ZERO })
            .collect();
        Self::new(geom, values, lambda)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geom
    }

    /// The translation-invariant fiber function on the cylinder.
    pub fn cylinder(&self) -> Vec<C64> {
        self.values[..self.geom.n_y].to_vec()
    }
}

fn commutator_matrix(phi: &[C64], m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| (phi[i] - phi[j]) * m[(i, j)])
}

/// Operator on `(−∞, L] × Y` with invariant tail.
#[derive(Clone, Debug)]
pub struct ExtendedKernel {
    geom: Arc<GridGeometry>,
    matrix: CMat,
    tail: InvariantKernel,
    lambda: usize,
}

impl ExtendedKernel {
    /// Validates shapes, tail bandwidth, `λ ≤ λ₀` and exact agreement with
    /// the Toeplitz extension of the tail on every entry with
    /// `min(s, s') ≤ −λ`.
    pub fn new(geom: Arc<GridGeometry>, matrix: CMat, tail: InvariantKernel, lambda: usize) -> Result<Self> {
        let n = geom.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::Shape(format!("matrix {:?} on a window of dimension {n}", matrix.shape())));
        }
        if !same_weights(tail.weights(), &geom.fiber_weights()) {
            return Err(Error::Shape("tail fiber weights differ from the geometry".into()));
        }
        if tail.radius() > geom.bandwidth {
            return Err(Error::WindowTooSmall(format!(
                "tail bandwidth {} exceeds cap {}",
                tail.radius(),
                geom.bandwidth
            )));
        }
        if lambda > geom.lambda0 {
            return Err(Error::WindowTooSmall(format!("invariance depth {lambda} exceeds lambda0 {}", geom.lambda0)));
        }
        let k = ExtendedKernel { geom, matrix, tail, lambda };
        let defect = k.deep_defect();
        if defect != 0.0 {
            return Err(Error::Invariant(format!("window matrix departs from its tail by {defect:e} below depth {lambda}")));
        }
        Ok(k)
    }

    fn deep_defect(&self) -> f64 {
        let g = &self.geom;
        let n_y = g.n_y;
        let lam = -(self.lambda as i64);
        let mut worst: f64 = 0.0;
        for s in g.s_min()..=g.s_max() {
            for t in g.s_min()..=g.s_max() {
                if s.min(t) > lam {
                    continue;
                }
                let b = self.matrix.view((g.offset(s), g.offset(t)), (n_y, n_y));
                match self.tail.coeff_ref(s - t) {
                    Some(l) => worst = worst.max(max_abs(&(b - l))),
                    None => worst = worst.max(b.iter().fold(0.0, |a, z| a.max(z.norm()))),
                }
            }
        }
        worst
    }

    /// Overwrites every entry with `min(s, s') ≤ −λ` by the tail.
    fn impose_tail(geom: &GridGeometry, matrix: &mut CMat, tail: &InvariantKernel, lambda: usize) {
        let n_y = geom.n_y;
        let lam = -(lambda as i64);
        let z = zeros(n_y, n_y);
        for s in geom.s_min()..=geom.s_max() {
            for t in geom.s_min()..=geom.s_max() {
                if s.min(t) > lam {
                    continue;
                }
                let blk = tail.coeff_ref(s - t).unwrap_or(&z);
                matrix.view_mut((geom.offset(s), geom.offset(t)), (n_y, n_y)).copy_from(blk);
            }
        }
    }

    /// `T(ℓ) + c` with `c` a dense matrix on the core slices `(−λ, L]`.
    pub fn from_tail_and_core(geom: Arc<GridGeometry>, tail: InvariantKernel, core: &CMat, lambda: usize) -> Result<Self> {
        let n_y = geom.n_y;
        let core_slices = geom.length + lambda;
        if core.shape() != (core_slices * n_y, core_slices * n_y) {
            return Err(Error::Shape(format!("core {:?} for {core_slices} core slices", core.shape())));
        }
        let mut m = tail.toeplitz(&geom);
        let o = geom.offset(1 - lambda as i64);
        let mut v = m.view_mut((o, o), (core.nrows(), core.ncols()));
        v += core;
        Self::new(geom, m, tail, lambda)
    }

    /// `T(ℓ)` itself.
    pub fn toeplitz(geom: Arc<GridGeometry>, tail: InvariantKernel) -> Result<Self> {
        let m = tail.toeplitz(&geom);
        Self::new(geom, m, tail, 0)
    }

    /// Embeds a compact kernel (zero tail).
    pub fn from_compact(k: &CompactKernel) -> Self {
        let geom = k.geom.clone();
        let lambda = k.support_depth();
        let tail = InvariantKernel::zero(geom.fiber_weights());
        ExtendedKernel { geom, matrix: k.matrix.clone(), tail, lambda }
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geom
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn tail(&self) -> &InvariantKernel {
        &self.tail
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    fn check_geom(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.geom, &other.geom) && *self.geom != *other.geom {
            return Err(Error::Shape("extended kernels on different grids".into()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        ExtendedKernel {
            geom: self.geom.clone(),
            matrix: self.matrix.adjoint(),
            tail: self.tail.adjoint(),
            lambda: self.lambda,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_geom(other)?;
        Ok(ExtendedKernel {
            geom: self.geom.clone(),
            matrix: &self.matrix + &other.matrix,
            tail: self.tail.add(&other.tail)?,
            lambda: self.lambda.max(other.lambda),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        ExtendedKernel { geom: self.geom.clone(), matrix: &self.matrix * z, tail: self.tail.scale(z), lambda: self.lambda }
    }

    /// `[φ, k]`; the tail becomes `[φ_cyl, ℓ]`.
    pub fn commutator(&self, phi: &Multiplier) -> Result<Self> {
        if *phi.geom != *self.geom {
            return Err(Error::Shape("multiplier on a different grid".into()));
        }
        let lambda = self.lambda.max(phi.lambda + self.tail.radius());
        if lambda > self.geom.lambda0 {
            return Err(Error::WindowTooSmall(format!(
                "commutator depth {lambda} exceeds lambda0 {}",
                self.geom.lambda0
            )));
        }
        let matrix = commutator_matrix(&phi.values, &self.matrix);
        let tail = self.tail.fiber_commutator(&phi.cylinder())?;
        Ok(ExtendedKernel { geom: self.geom.clone(), matrix, tail, lambda })
    }

    /// Serializes as a structured text document.
    pub fn to_text(&self) -> String {
        let doc = ExtendedDoc {
            format: "etacalc-extended-kernel".into(),
            geometry: (*self.geom).clone(),
            lambda: self.lambda,
            matrix: MatrixDoc::from(&self.matrix),
            tail: self.tail.offsets().map(|n| TailBlockDoc { offset: n, block: MatrixDoc::from(&self.tail.coeff(n)) }).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    /// Parses [`ExtendedKernel::to_text`] output; all invariants are rechecked.
    pub fn from_text(text: &str) -> Result<Self> {
        let doc: ExtendedDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format != "etacalc-extended-kernel" {
            return Err(Error::Parse(format!("unexpected format tag {:?}", doc.format)));
        }
        doc.geometry.validate()?;
        let geom = Arc::new(doc.geometry);
        let matrix = doc.matrix.to_matrix()?;
        let mut blocks = BTreeMap::new();
        for b in doc.tail {
            if blocks.insert(b.offset, b.block.to_matrix()?).is_some() {
                return Err(Error::Parse(format!("duplicate tail offset {}", b.offset)));
            }
        }
        let tail = InvariantKernel::new(geom.fiber_weights(), blocks)?;
        Self::new(geom, matrix, tail, doc.lambda)
    }
}

#[derive(Serialize, Deserialize)]
struct ExtendedDoc {
    format: String,
    geometry: GridGeometry,
    lambda: usize,
    matrix: MatrixDoc,
    tail: Vec<TailBlockDoc>,
}

#[derive(Serialize, Deserialize)]
struct TailBlockDoc {
    offset: i64,
    block: MatrixDoc,
}

/// Row-major complex matrix as `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl From<&CMat> for MatrixDoc {
    fn from(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatrixDoc { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl MatrixDoc {
    fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse(format!("{} entries for a {}x{} matrix", self.data.len(), self.rows, self.cols)));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re, im)
        }))
    }
}

/// Element of the ideal: supported on slices `≥ −(λ₀ + w)`.
#[derive(Clone, Debug)]
pub struct CompactKernel {
    geom: Arc<GridGeometry>,
    matrix: CMat,
}

impl CompactKernel {
    pub fn new(geom: Arc<GridGeometry>, matrix: CMat) -> Result<Self> {
        let n = geom.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::Shape(format!("matrix {:?} on a window of dimension {n}", matrix.shape())));
        }
        let k = CompactKernel { geom, matrix };
        let limit = Self::depth_limit(&k.geom);
        if k.support_depth() > limit {
            return Err(Error::Invariant(format!(
                "compact kernel reaches depth {} beyond {limit}",
                k.support_depth()
            )));
        }
        Ok(k)
    }

    /// Deepest slice (as a positive depth plus one) a compact kernel may touch.
    pub fn depth_limit(geom: &GridGeometry) -> usize {
        geom.lambda0 + geom.bandwidth + 1
    }

    pub fn zero(geom: Arc<GridGeometry>) -> Self {
        let n = geom.dim();
        CompactKernel { geom, matrix: zeros(n, n) }
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geom
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Smallest `d ≥ 0` such that all nonzero entries sit on slices `> −d`.
    pub fn support_depth(&self) -> usize {
        let g = &self.geom;
        let mut deepest: i64 = 1;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                if self.matrix[(i, j)] != ZERO {
                    deepest = deepest.min(g.slice_of(i)).min(g.slice_of(j));
                }
            }
        }
        (1 - deepest).max(0) as usize
    }

    fn check_geom(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.geom, &other.geom) && *self.geom != *other.geom {
            return Err(Error::Shape("compact kernels on different grids".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_geom(other)?;
        let m = weighted_block_mul(&self.matrix, &self.geom.fiber_weights(), &other.matrix);
        Ok(CompactKernel { geom: self.geom.clone(), matrix: m })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_geom(other)?;
        Ok(CompactKernel { geom: self.geom.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_geom(other)?;
        Ok(CompactKernel { geom: self.geom.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, z: C64) -> Self {
        CompactKernel { geom: self.geom.clone(), matrix: &self.matrix * z }
    }

    pub fn adjoint(&self) -> Self {
        CompactKernel { geom: self.geom.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn commutator(&self, phi: &Multiplier) -> Result<Self> {
        if *phi.geom != *self.geom {
            return Err(Error::Shape("multiplier on a different grid".into()));
        }
        Ok(CompactKernel { geom: self.geom.clone(), matrix: commutator_matrix(&phi.values, &self.matrix) })
    }
}

/// Product in `A_c`.
///
/// The window product is exact except on entries with both slices within
/// the tail reach of `−S`; all of those lie in the region `min(s,s') ≤ −λ`
/// of the result and are overwritten by the exact tail `ℓ_a * ℓ_b`.
pub fn compose(a: &ExtendedKernel, b: &ExtendedKernel) -> Result<ExtendedKernel> {
    a.check_geom(b)?;
    let g = &a.geom;
    let (wa, wb) = (a.tail.radius(), b.tail.radius());
    if wa + wb > g.bandwidth {
        return Err(Error::WindowTooSmall(format!("product bandwidth {} exceeds cap {}", wa + wb, g.bandwidth)));
    }
    let lambda = (a.lambda + wb).max(b.lambda + wa);
    if lambda > g.lambda0 {
        return Err(Error::WindowTooSmall(format!("product depth {lambda} exceeds lambda0 {}", g.lambda0)));
    }
    let mut matrix = weighted_block_mul(&a.matrix, &g.fiber_weights(), &b.matrix);
    let tail = a.tail.convolve(&b.tail)?;
    ExtendedKernel::impose_tail(g, &mut matrix, &tail, lambda);
    Ok(ExtendedKernel { geom: a.geom.clone(), matrix, tail, lambda })
}

/// `π(k) = ℓ`.
pub fn project_pi(k: &ExtendedKernel) -> InvariantKernel {
    k.tail.clone()
}

/// `s(ℓ) = χ⁰ T(ℓ) χ⁰`, with invariance depth equal to the bandwidth of `ℓ`.
pub fn section_s(l: &InvariantKernel, geom: Arc<GridGeometry>) -> Result<ExtendedKernel> {
    let w = l.radius();
    if w > geom.lambda0 {
        return Err(Error::WindowTooSmall(format!("bandwidth {w} exceeds lambda0 {}", geom.lambda0)));
    }
    let mut m = l.toeplitz(&geom);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if geom.slice_of(i) > 0 || geom.slice_of(j) > 0 {
                m[(i, j)] = ZERO;
            }
        }
    }
    ExtendedKernel::new(geom, m, l.clone(), w)
}

/// `t(k) = k − s(π(k))`, an element of the ideal.
pub fn section_t(k: &ExtendedKernel) -> Result<CompactKernel> {
    let s = section_s(&k.tail, k.geom.clone())?;
    let m = &k.matrix - &s.matrix;
    let out = CompactKernel::new(k.geom.clone(), m)?;
    Ok(out)
}

/// `[χ^λ, ℓ]` on the window: entries `(χ(s) − χ(s')) ℓ(s − s')`, supported
/// within `w` slices of the cut.
pub fn chi_commutator(l: &InvariantKernel, lambda: usize, geom: Arc<GridGeometry>) -> Result<CompactKernel> {
    let w = l.radius();
    if lambda + w > geom.depth || lambda > geom.lambda0 {
        return Err(Error::WindowTooSmall(format!("cut at depth {lambda} with bandwidth {w} leaves the window")));
    }
    if (w as i64) - (lambda as i64) > geom.s_max() {
        return Err(Error::WindowTooSmall(format!("cut at depth {lambda} with bandwidth {w} passes the interior end")));
    }
    if !same_weights(l.weights(), &geom.fiber_weights()) {
        return Err(Error::Shape("kernel fiber weights differ from the geometry".into()));
    }
    let mut m = l.toeplitz(&geom);
    let cut = -(lambda as i64);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let xi = (geom.slice_of(i) <= cut) as i32 as f64;
            let xj = (geom.slice_of(j) <= cut) as i32 as f64;
            m[(i, j)] *= xi - xj;
        }
    }
    CompactKernel::new(geom, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;

    fn geom(n_y: usize) -> Arc<GridGeometry> {
        Arc::new(GridGeometry::new(n_y, 16, 3, 4, 6, 0.5, (0..n_y).map(|i| 1.0 + 0.25 * i as f64).collect()).unwrap())
    }

    fn random_tail(rng: &mut Rng, g: &GridGeometry, w: usize) -> InvariantKernel {
        InvariantKernel::from_fn(g.fiber_weights(), w, |_| rng.matrix(g.n_y, g.n_y)).unwrap()
    }

    fn random_extended(rng: &mut Rng, g: &Arc<GridGeometry>, w: usize, lambda: usize) -> ExtendedKernel {
        let tail = random_tail(rng, g, w);
        let k = (g.length + lambda) * g.n_y;
        ExtendedKernel::from_tail_and_core(g.clone(), tail, &rng.matrix(k, k), lambda).unwrap()
    }

    /// Infinite-operator oracle: the same product computed on a much deeper
    /// window and restricted back.
    fn deep_product(a: &ExtendedKernel, b: &ExtendedKernel) -> CMat {
        let g = a.geometry();
        let big = Arc::new(g.with_depth(g.depth + 20).unwrap());
        let extend = |k: &ExtendedKernel| {
            let mut m = k.tail().toeplitz(&big);
            let off = big.offset(g.s_min());
            m.view_mut((off, off), (g.dim(), g.dim())).copy_from(k.matrix());
            m
        };
        let (ma, mb) = (extend(a), extend(b));
        let w = big.site_weights();
        let p = scale_columns(&ma, &w) * mb;
        let off = big.offset(g.s_min());
        p.view((off, off), (g.dim(), g.dim())).into_owned()
    }

    #[test]
    fn compose_matches_deep_window_oracle() {
        let g = geom(2);
        let mut rng = Rng::seeded(11);
        for _ in 0..5 {
            let a = random_extended(&mut rng, &g, 2, 2);
            let b = random_extended(&mut rng, &g, 1, 3);
            let ab = compose(&a, &b).unwrap();
            assert!(max_abs(&(ab.matrix() - deep_product(&a, &b))) < 1e-12);
            assert_eq!(ab.lambda(), 5);
        }
    }

    #[test]
    fn compose_rejects_bandwidth_overflow() {
        let g = geom(1);
        let mut rng = Rng::seeded(1);
        let a = random_extended(&mut rng, &g, 3, 1);
        let b = random_extended(&mut rng, &g, 2, 1);
        assert!(matches!(compose(&a, &b), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn pi_is_a_homomorphism_and_s_a_section() {
        let g = geom(2);
        let mut rng = Rng::seeded(12);
        let a = random_extended(&mut rng, &g, 1, 2);
        let b = random_extended(&mut rng, &g, 2, 1);
        let ab = compose(&a, &b).unwrap();
        let lhs = project_pi(&ab);
        let rhs = project_pi(&a).convolve(&project_pi(&b)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        let l = random_tail(&mut rng, &g, 2);
        assert_eq!(project_pi(&section_s(&l, g.clone()).unwrap()), l);
    }

    #[test]
    fn t_kernel_vanishes_on_sections_and_deep_block() {
        let g = geom(2);
        let mut rng = Rng::seeded(13);
        let l = random_tail(&mut rng, &g, 2);
        let s = section_s(&l, g.clone()).unwrap();
        assert_eq!(max_abs(section_t(&s).unwrap().matrix()), 0.0);
        let k = random_extended(&mut rng, &g, 2, 3);
        let t = section_t(&k).unwrap();
        assert!(t.support_depth() <= 3);
    }

    #[test]
    fn shift_commutator_has_single_entry() {
        let g = Arc::new(GridGeometry::uniform(1, 12, 3, 2, 4).unwrap());
        let shift = InvariantKernel::shift(g.fiber_weights(), 1);
        for lambda in 0..4usize {
            let k = chi_commutator(&shift, lambda, g.clone()).unwrap();
            let m = k.matrix();
            let (r, col) = (g.offset(-(lambda as i64) + 1), g.offset(-(lambda as i64)));
            assert_eq!(m[(r, col)], c(-1.0, 0.0));
            let nnz = m.iter().filter(|z| **z != ZERO).count();
            assert_eq!(nnz, 1);
        }
    }

    #[test]
    fn chi_commutator_out_of_window_is_an_error() {
        let g = Arc::new(GridGeometry::uniform(1, 12, 1, 2, 4).unwrap());
        let l = InvariantKernel::shift(g.fiber_weights(), 2);
        assert!(chi_commutator(&l, 11, g.clone()).is_err());
        assert!(chi_commutator(&l, 0, g).is_err());
    }

    #[test]
    fn adjoint_of_product_reverses() {
        let g = geom(2);
        let mut rng = Rng::seeded(14);
        let a = random_extended(&mut rng, &g, 1, 2);
        let b = random_extended(&mut rng, &g, 1, 2);
        let lhs = compose(&a, &b).unwrap().adjoint();
        let rhs = compose(&b.adjoint(), &a.adjoint()).unwrap();
        assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let g = geom(2);
        let mut rng = Rng::seeded(15);
        let k = random_extended(&mut rng, &g, 2, 3);
        let text = k.to_text();
        let back = ExtendedKernel::from_text(&text).unwrap();
        assert_eq!(back.matrix(), k.matrix());
        assert_eq!(back.tail(), k.tail());
        assert_eq!(back.lambda(), k.lambda());
        assert_eq!(**back.geometry(), **k.geometry());
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn corrupted_text_is_rejected() {
        let g = geom(1);
        let mut rng = Rng::seeded(16);
        let k = random_extended(&mut rng, &g, 1, 2);
        let text = k.to_text().replace("\"lambda\": 2", "\"lambda\": 0");
        assert!(matches!(ExtendedKernel::from_text(&text), Err(Error::Invariant(_))));
        assert!(matches!(ExtendedKernel::from_text("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn multiplier_commutator_tracks_depth() {
        let g = geom(2);
        let mut rng = Rng::seeded(17);
        let k = random_extended(&mut rng, &g, 1, 2);
        let mut vals: Vec<C64> = (0..g.dim()).map(|_| C64::new(0.0, 0.0)).collect();
        let cyl = [c(0.5, 0.0), c(-1.0, 0.25)];
        for i in 0..g.dim() {
            vals[i] = if g.slice_of(i) <= -3 { cyl[i % 2] } else { rng.complex() };
        }
        let phi = Multiplier::new(g.clone(), vals, 3).unwrap();
        let kc = k.commutator(&phi).unwrap();
        assert_eq!(kc.lambda(), 4);
        assert_eq!(project_pi(&kc), project_pi(&k).fiber_commutator(&cyl).unwrap());
    }
}
