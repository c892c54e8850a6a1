use std::f64::consts::PI;

use crate::linalg::{c, hermitian_defect, CMat, HermEig, C64};
use crate::{Error, Result};

/// Hermitian boundary operator `A`.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    a: CMat,
}

impl BoundaryOperator {
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("boundary operator must be square".into()));
        }
        let defect = hermitian_defect(&a);
        if defect > 1e-13 {
            return Err(Error::Invariant(format!("boundary operator not Hermitian ({defect:e})")));
        }
        Ok(BoundaryOperator { a })
    }

    pub fn scalar(a: f64) -> Self {
        BoundaryOperator { a: CMat::from_element(1, 1, c(a, 0.0)) }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        BoundaryOperator { a: crate::linalg::diag_real(d) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermEig::new(&self.a).values
    }

    pub fn scaled(&self, s: f64) -> Self {
        BoundaryOperator { a: &self.a * c(s, 0.0) }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut a = crate::linalg::zeros(n + m, n + m);
        a.view_mut((0, 0), (n, n)).copy_from(&self.a);
        a.view_mut((n, n), (m, m)).copy_from(&other.a);
        BoundaryOperator { a }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct GapCheck {
    pub ok: bool,
    pub margin: f64,
}

/// `min |spec(A)| ≥ ε`, with the margin `min |spec(A)|`.
pub fn spectral_gap_check(a: &BoundaryOperator, eps: f64) -> GapCheck {
    let margin = a.eigenvalues().iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    GapCheck { ok: margin >= eps, margin }
}

/// Spectral discretization of `−i d/dθ + shift` on `n` equispaced points of
/// the circle; its eigenvalues are `k + shift`, `k ∈ {−n/2+1, …, n/2}`.
pub fn circle_dirac(n: usize, shift: f64) -> BoundaryOperator {
    let modes: Vec<i64> = (0..n as i64).map(|j| j - n as i64 / 2 + 1).collect();
    let f = CMat::from_fn(n, n, |j, k| C64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (j as f64) * modes[k] as f64 / n as f64));
    let d = crate::linalg::diag_real(&modes.iter().map(|k| *k as f64 + shift).collect::<Vec<_>>());
    let a = &f * d * f.adjoint();
    let a = (&a + a.adjoint()) * c(0.5, 0.0);
    BoundaryOperator { a }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        let g = spectral_gap_check(&BoundaryOperator::diagonal(&[1.0, -2.0]), 0.5);
        assert!(g.ok);
        assert!((g.margin - 1.0).abs() < 1e-15);
        let z = spectral_gap_check(&BoundaryOperator::diagonal(&[0.0, 3.0]), 0.1);
        assert!(!z.ok && z.margin == 0.0);
        let circ = spectral_gap_check(&circle_dirac(64, 0.5), 0.25);
        assert!(circ.ok && (circ.margin - 0.5).abs() < 1e-12);
    }
}
