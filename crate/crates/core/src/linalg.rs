//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag_real(d: &[f64]) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| if i == j { c(d[i], 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn diag(d: &[C64]) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// `a · b` through real matrix products, which are much faster than the
/// generic complex product for large matrices.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    if a.nrows().min(a.ncols()).min(b.ncols()) < 16 {
        return a * b;
    }
    let (ar, br) = (a.map(|z| z.re), b.map(|z| z.re));
    let ai = (!is_real(a)).then(|| a.map(|z| z.im));
    let bi = (!is_real(b)).then(|| b.map(|z| z.im));
    let mut re = &ar * &br;
    let mut im = DMatrix::<f64>::zeros(a.nrows(), b.ncols());
    if let Some(bi) = &bi {
        im += &ar * bi;
    }
    if let Some(ai) = &ai {
        im += ai * &br;
        if let Some(bi) = &bi {
            re -= ai * bi;
        }
    }
    CMat::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Nonzero `bs × bs` blocks of each block row.
fn block_pattern(m: &CMat, bs: usize) -> Vec<Vec<usize>> {
    let zero = C64::new(0.0, 0.0);
    (0..m.nrows() / bs)
        .map(|i| {
            (0..m.ncols() / bs)
                .filter(|&j| m.view((i * bs, j * bs), (bs, bs)).iter().any(|z| *z != zero))
                .collect()
        })
        .collect()
}

/// `a · b` skipping zero `bs × bs` blocks; dimensions must be multiples of `bs`.
pub fn block_mul(a: &CMat, b: &CMat, bs: usize) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    assert!(a.nrows() % bs == 0 && a.ncols() % bs == 0 && b.ncols() % bs == 0);
    let pa = block_pattern(a, bs);
    let pb = block_pattern(b, bs);
    let one = C64::new(1.0, 0.0);
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for (i, row) in pa.iter().enumerate() {
        for &k in row {
            let ab = a.view((i * bs, k * bs), (bs, bs));
            for &j in &pb[k] {
                out.view_mut((i * bs, j * bs), (bs, bs)).gemm(one, &ab, &b.view((k * bs, j * bs), (bs, bs)), one);
            }
        }
    }
    out
}

/// `a · diag(w) · b` with `w` repeating with period `w.len()`, blockwise.
pub fn weighted_block_mul(a: &CMat, w: &[f64], b: &CMat) -> CMat {
    let n = w.len();
    let mut aw = a.clone();
    for j in 0..aw.ncols() {
        aw.column_mut(j).scale_mut(w[j % n]);
    }
    block_mul(&aw, b, n)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEig {
    pub fn new(m: &CMat) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        let n = h.nrows();
        if n == 0 {
            return HermEig { values: vec![], vectors: zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        HermEig { values, vectors }
    }

    /// `U f(Λ) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let u = &self.vectors;
        let d: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut ud = u.clone();
        for (j, dj) in d.iter().enumerate() {
            ud.column_mut(j).scale_mut(*dj);
        }
        ud * u.adjoint()
    }

    /// Directional derivative of `M ↦ f(M)` in direction `dm` (Daleckii-Krein).
    pub fn derivative(&self, dm: &CMat, f: impl Fn(f64) -> f64, fprime: impl Fn(f64) -> f64) -> CMat {
        let u = &self.vectors;
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut b = u.adjoint() * dm * u;
        for i in 0..n {
            for j in 0..n {
                let (li, lj) = (self.values[i], self.values[j]);
                let tol = 1e-10 * li.abs().max(lj.abs()).max(1.0);
                let dd = if (li - lj).abs() <= tol {
                    fprime(0.5 * (li + lj))
                } else {
                    (fv[i] - fv[j]) / (li - lj)
                };
                b[(i, j)] *= dd;
            }
        }
        u * b * u.adjoint()
    }
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("singular {}x{} matrix", m.nrows(), m.ncols())))
}

/// Moore-Penrose pseudo-inverse dropping singular values below
/// `rel_tol · σ_max`. Returns the inverse and the number of dropped values.
pub fn pinv(m: &CMat, rel_tol: f64) -> Result<(CMat, usize)> {
    let (r, cdim) = m.shape();
    if r == 0 || cdim == 0 {
        return Ok((zeros(cdim, r), 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("svd without u".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("svd without v".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax;
    let k = svd.singular_values.len();
    let mut dropped = 0;
    let mut vs = vt.adjoint();
    for j in 0..k {
        let s = svd.singular_values[j];
        if s > cut {
            vs.column_mut(j).scale_mut(1.0 / s);
        } else {
            vs.column_mut(j).fill(C64::new(0.0, 0.0));
            dropped += 1;
        }
    }
    Ok((vs * u.adjoint(), dropped))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    m.clone().svd(false, false).singular_values.iter().cloned().collect()
}

/// Left surface Green's function of a semi-infinite Hermitian block chain
/// `… , s−2, s−1, s` with diagonal block `h0` and coupling `u = H(j−1, j)`.
/// Solves `g = (h0 − u† g u)^{-1}` by decimation.
pub fn left_surface_green(h0: &CMat, u: &CMat, tol: f64) -> Result<CMat> {
    // alpha couples the surface to the bulk side, beta the bulk back to it.
    let mut alpha = u.adjoint();
    let mut beta = u.clone();
    let mut eps_s = h0.clone();
    let mut eps = h0.clone();
    for _ in 0..200 {
        let g = inverse(&eps)?;
        let agb = &alpha * &g * &beta;
        let bga = &beta * &g * &alpha;
        eps_s -= &agb;
        eps -= agb + bga;
        alpha = &alpha * &g * &alpha;
        beta = &beta * &g * &beta;
        if max_abs(&alpha) + max_abs(&beta) < tol {
            let gs = inverse(&eps_s)?;
            let resid = max_abs(&(inverse(&(h0 - u.adjoint() * &gs * u))? - &gs));
            if resid > 1e3 * tol.max(1e-14) * (1.0 + max_abs(&gs)) {
                return Err(Error::NotConverged(format!("surface Green's function residual {resid:e}")));
            }
            return Ok(gs);
        }
    }
    Err(Error::NotConverged("surface Green's function decimation".into()))
}

/// Hermitian block tridiagonal matrix: `diag[i] = H(i,i)`, `upper[i] = H(i,i+1)`.
#[derive(Clone, Debug)]
pub struct HermBlockTridiag {
    pub diag: Vec<CMat>,
    pub upper: Vec<CMat>,
}

impl HermBlockTridiag {
    /// Diagonal blocks of `H^{-1}` where the first block additionally carries
    /// the self-energy `sigma_left` of an eliminated semi-infinite chain.
    pub fn inverse_diagonal(&self, sigma_left: Option<&CMat>) -> Result<Vec<CMat>> {
        let n = self.diag.len();
        if n == 0 {
            return Ok(vec![]);
        }
        let mut gl = Vec::with_capacity(n);
        let mut d0 = self.diag[0].clone();
        if let Some(s) = sigma_left {
            d0 -= s;
        }
        gl.push(inverse(&d0)?);
        for i in 1..n {
            let u = &self.upper[i - 1];
            let di = &self.diag[i] - u.adjoint() * &gl[i - 1] * u;
            gl.push(inverse(&di)?);
        }
        let mut g = vec![zeros(0, 0); n];
        g[n - 1] = gl[n - 1].clone();
        for i in (0..n - 1).rev() {
            let u = &self.upper[i];
            g[i] = &gl[i] + &gl[i] * u * &g[i + 1] * u.adjoint() * &gl[i];
        }
        Ok(g)
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.diag.len();
        let m = if n > 0 { self.diag[0].nrows() } else { 0 };
        let mut out = zeros(n * m, n * m);
        for i in 0..n {
            out.view_mut((i * m, i * m), (m, m)).copy_from(&self.diag[i]);
            if i + 1 < n {
                out.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(&self.upper[i]);
                out.view_mut(((i + 1) * m, i * m), (m, m)).copy_from(&self.upper[i].adjoint());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;

    #[test]
    fn block_mul_matches_dense() {
        let mut rng = crate::random::Rng::seeded(4);
        let mut a = rng.matrix(6, 9);
        a.view_mut((0, 3), (3, 3)).fill(C64::new(0.0, 0.0));
        let b = rng.matrix(9, 3);
        assert!(max_abs(&(block_mul(&a, &b, 3) - &a * &b)) < 1e-13);
    }

    #[test]
    fn matmul_matches_complex_product() {
        let mut rng = Rng::seeded(5);
        let a = rng.matrix(40, 33);
        let b = rng.matrix(33, 21);
        assert!(max_abs(&(matmul(&a, &b) - &a * &b)) < 1e-12);
        let ar = a.map(|z| c(z.re, 0.0));
        assert!(max_abs(&(matmul(&ar, &b) - &ar * &b)) < 1e-12);
        assert!(max_abs(&(matmul(&b.transpose(), &ar.transpose()) - b.transpose() * ar.transpose())) < 1e-12);
    }

    #[test]
    fn daleckii_krein_matches_difference_quotient() {
        let mut rng = Rng::seeded(3);
        let a = rng.hermitian(5);
        let d = rng.hermitian(5);
        let e = HermEig::new(&a);
        let an = e.derivative(&d, |x| (-x).exp(), |x| -(-x).exp());
        let h = 1e-6;
        let fp = HermEig::new(&(&a + d.scale(h))).apply(|x| (-x).exp());
        let fm = HermEig::new(&(&a - d.scale(h))).apply(|x| (-x).exp());
        let fd = (fp - fm).scale(0.5 / h);
        assert!(max_abs(&(an - fd)) < 1e-7);
    }

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let mut rng = Rng::seeded(4);
        let a = rng.matrix(6, 6);
        let (p, dropped) = pinv(&a, 1e-12).unwrap();
        assert_eq!(dropped, 0);
        assert!(max_abs(&(p * &a - eye(6))) < 1e-10);
    }

    #[test]
    fn block_tridiagonal_inverse_with_surface_term_matches_long_chain() {
        let mut rng = Rng::seeded(5);
        let m = 2;
        let u = rng.matrix(m, m).scale(0.3);
        let h0 = eye(m).scale(3.0) + rng.hermitian(m).scale(0.2);
        let n_long = 120;
        let n = 6;
        let mk = |len: usize| HermBlockTridiag { diag: vec![h0.clone(); len], upper: vec![u.clone(); len - 1] };
        let long = mk(n_long).inverse_diagonal(None).unwrap();
        let g = left_surface_green(&h0, &u, 1e-15).unwrap();
        let sigma = u.adjoint() * &g * &u;
        let short = mk(n).inverse_diagonal(Some(&sigma)).unwrap();
        for i in 0..n {
            assert!(max_abs(&(&short[i] - &long[n_long - n + i])) < 1e-12);
        }
        let dense = inverse(&mk(n).to_dense()).unwrap();
        let plain = mk(n).inverse_diagonal(None).unwrap();
        for i in 0..n {
            let blk = dense.view((i * m, i * m), (m, m)).into_owned();
            assert!(max_abs(&(blk - &plain[i])) < 1e-12);
        }
    }
}
