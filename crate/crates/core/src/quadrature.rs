//! Composite Gauss-Legendre quadrature with panel doubling.

use crate::linalg::{c, C64};
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A quadrature result with its convergence record.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Integral {
    pub value: C64,
    pub panels: usize,
    pub last_change: f64,
}

/// Fixed composite rule with `panels` equal panels of `order` nodes.
pub fn composite(f: &(dyn Fn(f64) -> Result<C64> + Sync), a: f64, b: f64, panels: usize, order: usize) -> Result<C64> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            x.iter().zip(&w).map(move |(xi, wi)| (mid + 0.5 * h * xi, 0.5 * h * wi)).collect::<Vec<_>>()
        })
        .collect();
    let values = crate::par::map_slice(&nodes, |&(t, _)| f(t));
    let mut acc = c(0.0, 0.0);
    for (v, (_, wt)) in values.into_iter().zip(&nodes) {
        acc += v? * *wt;
    }
    Ok(acc)
}

/// Doubles the panel count until two successive values differ by at most `tol`.
pub fn adaptive(f: &(dyn Fn(f64) -> Result<C64> + Sync), a: f64, b: f64, tol: f64, start_panels: usize, max_panels: usize) -> Result<Integral> {
    const ORDER: usize = 8;
    let mut panels = start_panels.max(1);
    let mut prev = composite(f, a, b, panels, ORDER)?;
    loop {
        if panels * 2 > max_panels {
            return Err(Error::NotConverged(format!("quadrature on [{a}, {b}] not within {tol:e} at {panels} panels")));
        }
        panels *= 2;
        let next = composite(f, a, b, panels, ORDER)?;
        let change = (next - prev).norm();
        if change <= tol {
            return Ok(Integral { value: next, panels, last_change: change });
        }
        prev = next;
    }
}

/// Locally adaptive bisection from `initial` equal pieces: an interval is
/// accepted when its 8- and 16-point Gauss values agree to its share of
/// `tol`, or to rounding.
pub fn bisection(f: &dyn Fn(f64) -> Result<C64>, a: f64, b: f64, tol: f64, initial: usize, max_intervals: usize) -> Result<Integral> {
    let (x8, w8) = gauss_legendre(8);
    let (x16, w16) = gauss_legendre(16);
    // value and integral of |f|
    let rule = |x: &[f64], w: &[f64], lo: f64, hi: f64| -> Result<(C64, f64)> {
        let (m, r) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        let (mut acc, mut abs) = (C64::new(0.0, 0.0), 0.0);
        for (xi, wi) in x.iter().zip(w) {
            let v = f(m + r * xi)?;
            acc += v * (wi * r);
            abs += v.norm() * wi * r;
        }
        Ok((acc, abs))
    };
    let n0 = initial.max(1);
    let mut stack: Vec<(f64, f64)> =
        (0..n0).rev().map(|j| (a + (b - a) * j as f64 / n0 as f64, a + (b - a) * (j + 1) as f64 / n0 as f64)).collect();
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut accepted = 0;
    while let Some((lo, hi)) = stack.pop() {
        let (coarse, _) = rule(&x8, &w8, lo, hi)?;
        let (fine, abs) = rule(&x16, &w16, lo, hi)?;
        let diff = (fine - coarse).norm();
        let floor = 64.0 * f64::EPSILON * abs;
        if diff <= (tol * (hi - lo) / (b - a)).max(floor) || (hi - lo) < 1e-12 * (b - a).abs() {
            value += fine;
            err += diff;
            accepted += 1;
        } else {
            if accepted + stack.len() >= max_intervals {
                return Err(Error::NotConverged(format!("bisection on [{a}, {b}] exceeded {max_intervals} intervals")));
            }
            let mid = (lo + hi) / 2.0;
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
    }
    Ok(Integral { value, panels: accepted, last_change: err })
}
