//! Spectral flow of a Hermitian family `x ↦ A(x)` through zero.

use serde::Serialize;

use crate::linalg::{CMat, HermEig};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Crossing {
    pub position: f64,
    /// `+1` for an eigenvalue crossing from negative to positive.
    pub direction: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralFlow {
    pub flow: i64,
    pub crossings: Vec<Crossing>,
}

/// Tracks sorted eigenvalues on `samples` equal steps of `[a, b]` and
/// locates each sign change of a tracked eigenvalue by bisection.
pub fn spectral_flow(family: &dyn Fn(f64) -> CMat, a: f64, b: f64, samples: usize) -> Result<SpectralFlow> {
    let eig = |x: f64| HermEig::new(&family(x)).values;
    for x in [a, b] {
        if eig(x).iter().any(|e| e.abs() < 1e-12) {
            return Err(Error::Gap(format!("zero eigenvalue at the endpoint {x}")));
        }
    }
    let n = samples.max(2);
    let xs: Vec<f64> = (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect();
    let vals: Vec<Vec<f64>> = xs.iter().map(|&x| eig(x)).collect();
    let mut crossings = Vec::new();
    for k in 0..n {
        for i in 0..vals[k].len() {
            let (l, r) = (vals[k][i], vals[k + 1][i]);
            if (l < 0.0) == (r < 0.0) {
                continue;
            }
            let (mut lo, mut hi) = (xs[k], xs[k + 1]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (eig(mid)[i] < 0.0) == (l < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(Crossing { position: 0.5 * (lo + hi), direction: if l < 0.0 { 1 } else { -1 } });
        }
    }
    Ok(SpectralFlow { flow: crossings.iter().map(|c| c.direction).sum(), crossings })
}
