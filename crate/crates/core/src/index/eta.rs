//! Transgression integrals `∫ σ₁([ṗ_t, p_t], p_t) dt` in `u = ln t`.

use serde::Serialize;

use crate::dirac::{spectral_gap_check, transgression_integrand, BoundaryOperator, ProjectionKind, Symbol};
use crate::linalg::C64;
use crate::quadrature::adaptive;
use crate::{Error, Result};

/// Stop extending an end once `|t · I(t)|` is below this.
pub const INTEGRAND_CUTOFF: f64 = 1e-10;
/// Two successive quadrature refinements must agree to this.
pub const QUADRATURE_TOL: f64 = 1e-10;
const MAX_LOG_T: f64 = 40.0;

#[derive(Clone, Debug, Serialize)]
pub struct TailEstimate {
    pub log_t: f64,
    /// `t · I(t)` at the end of the range.
    pub weighted_integrand: f64,
    /// Local exponent of `|t · I(t)|` in `ln t`.
    pub slope: f64,
    /// Bound on the omitted part of the integral.
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaIntegral {
    pub value: C64,
    /// Lower limit; `0` for the full integral.
    pub t_min: f64,
    pub t_max: f64,
    pub panels: usize,
    pub last_change: f64,
    /// `(t, I(t))` at `t = 1e−6` when the integral starts at `0`.
    pub small_t: Option<(f64, f64)>,
    pub upper_tail: TailEstimate,
    /// `(t, I(t))` on a coarse log grid, for plots.
    pub samples: Vec<(f64, f64)>,
}

impl EtaIntegral {
    pub fn tail(&self) -> f64 {
        self.upper_tail.estimate
    }
}

fn weighted(symbol: &Symbol, kind: ProjectionKind, u: f64) -> Result<C64> {
    Ok(transgression_integrand(symbol, kind, u.exp())? * u.exp())
}

/// Moves `u = ln t` up in unit steps until `|t·I| ≤ cutoff`, then estimates
/// the omitted tail from the local decay `|t·I| ~ e^{−slope·u}`.
fn find_end(symbol: &Symbol, kind: ProjectionKind, start: f64) -> Result<TailEstimate> {
    let mut u = start;
    loop {
        let g = weighted(symbol, kind, u)?.norm();
        if g <= INTEGRAND_CUTOFF {
            let inner = weighted(symbol, kind, u - 0.5)?.norm();
            let slope = if g > 0.0 && inner > 0.0 { (inner / g).ln() / 0.5 } else { f64::INFINITY };
            let estimate = if slope > 0.0 { g / slope } else { f64::INFINITY };
            return Ok(TailEstimate { log_t: u, weighted_integrand: g, slope, estimate });
        }
        u += 1.0;
        if u > MAX_LOG_T {
            return Err(Error::NotConverged(format!("integrand still {g:e} at ln t = {u}; extend the grid")));
        }
    }
}

/// `∫_{t_lo}^{∞} I(t) dt`, or `∫_0^∞` when `t_lo` is `None`.
///
/// The integrand is regular at `t = 0`, so `[0, 1]` is integrated in `t`
/// and the rest in `u = ln t`.
pub fn transgression_integral(symbol: &Symbol, kind: ProjectionKind, t_lo: Option<f64>) -> Result<EtaIntegral> {
    let u_lo = t_lo.map_or(0.0, f64::ln);
    let upper = find_end(symbol, kind, u_lo.max(1.0))?;
    let f = |u: f64| weighted(symbol, kind, u);
    let start = ((upper.log_t - u_lo).ceil() as usize).max(2);
    let log_part = adaptive(&f, u_lo, upper.log_t, QUADRATURE_TOL, start, 1 << 12)?;
    let (mut value, mut panels, mut change) = (log_part.value, log_part.panels, log_part.last_change);
    let mut small_t = None;
    if t_lo.is_none() {
        let g = |t: f64| transgression_integrand(symbol, kind, t);
        let head = adaptive(&g, 0.0, 1.0, QUADRATURE_TOL, 1, 1 << 10)?;
        value += head.value;
        panels += head.panels;
        change += head.last_change;
        small_t = Some((1e-6, g(1e-6)?.re));
    }
    let samples = (0..=16)
        .map(|j| {
            let u = u_lo.min(-3.0) + (upper.log_t - u_lo.min(-3.0)) * j as f64 / 16.0;
            Ok((u.exp(), (f(u)? / u.exp()).re))
        })
        .collect::<Result<_>>()?;
    Ok(EtaIntegral {
        value,
        t_min: t_lo.unwrap_or(0.0),
        t_max: upper.log_t.exp(),
        panels,
        last_change: change,
        small_t,
        upper_tail: upper,
        samples,
    })
}

/// Symbol used for the eta invariant of a boundary operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EtaSymbol {
    /// `iμ + A` on the line.
    Continuum,
    /// Forward difference with slice step `h`.
    Lattice { h: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaReport {
    pub value: C64,
    pub integral: EtaIntegral,
    /// Signature of `A`, the spectral eta of the boundary operator.
    pub signature: i64,
    pub decay: Option<DecayFit>,
}

/// Least-squares fits of the measured integrand for `t ≥ 1`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub gap: f64,
    /// `c` in `|I(t)| ≈ C e^{−c t² gap²}`.
    pub gaussian_rate: f64,
    pub gaussian_rms: f64,
    /// `p` in `|I(t)| ≈ C t^{−p}`.
    pub power_exponent: f64,
    pub power_rms: f64,
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Fits `ln |I|` against `t² gap²` and against `ln t` on samples with
/// `t ≥ 1` and `|I|` above `1e−9` of its peak.
pub fn decay_fit(samples: &[(f64, f64)], gap: f64) -> Option<DecayFit> {
    // samples far below the peak are dominated by rounding
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|(t, i)| *t >= 1.0 && i.abs() > 1e-9 * peak).map(|&(t, i)| (t, i.abs().ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (g, g_rms) = line_fit(&pts.iter().map(|p| p.0 * p.0 * gap * gap).collect::<Vec<_>>(), &y);
    let (q, q_rms) = line_fit(&pts.iter().map(|p| p.0.ln()).collect::<Vec<_>>(), &y);
    Some(DecayFit { gap, gaussian_rate: -g, gaussian_rms: g_rms, power_exponent: -q, power_rms: q_rms })
}

/// `η = ∫_0^∞ σ₁([ṗ_t, p_t], p_t) dt` for the cylinder over `A`.
pub fn eta_invariant(a: &BoundaryOperator, kind: ProjectionKind, symbol: EtaSymbol, eps: f64) -> Result<EtaReport> {
    let gap = spectral_gap_check(a, eps);
    if !gap.ok {
        return Err(Error::Gap(format!("margin {} below {eps}: the eta integral diverges", gap.margin)));
    }
    let sym = match symbol {
        EtaSymbol::Continuum => Symbol::continuum(a),
        EtaSymbol::Lattice { h } => Symbol::lattice_cylinder(a, h),
    };
    let integral = transgression_integral(&sym, kind, None)?;
    let signature = a.eigenvalues().iter().map(|e| e.signum() as i64).sum();
    let decay = decay_fit(&integral.samples, gap.margin);
    Ok(EtaReport { value: integral.value, integral, signature, decay })
}

/// Least-squares `κ` in `η ≈ κ · signature` over a set of reports.
pub fn signature_fit(reports: &[EtaReport]) -> Option<f64> {
    let (num, den) = reports.iter().fold((0.0, 0.0), |(n, d), r| (n + r.value.re * r.signature as f64, d + (r.signature * r.signature) as f64));
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuum_eta_is_odd_and_scale_invariant() {
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let e1 = eta_invariant(&BoundaryOperator::scalar(1.0), kind, EtaSymbol::Continuum, 0.1).unwrap();
            let em = eta_invariant(&BoundaryOperator::scalar(-1.0), kind, EtaSymbol::Continuum, 0.1).unwrap();
            let e3 = eta_invariant(&BoundaryOperator::scalar(3.0), kind, EtaSymbol::Continuum, 0.1).unwrap();
            assert!((e1.value + em.value).norm() < 1e-8, "{kind:?} {} {}", e1.value, em.value);
            assert!((e1.value - e3.value).norm() < 1e-8, "{kind:?} {} {}", e1.value, e3.value);
            assert!(e1.integral.tail() < 1e-8);
            assert!((signature_fit(&[e1, em]).unwrap() + 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn eta_is_additive_over_blocks() {
        let parts = [1.0, -2.0, 0.7];
        let sum: C64 = parts
            .iter()
            .map(|&a| eta_invariant(&BoundaryOperator::scalar(a), ProjectionKind::Graph, EtaSymbol::Continuum, 0.1).unwrap().value)
            .sum();
        let block = eta_invariant(&BoundaryOperator::diagonal(&parts), ProjectionKind::Graph, EtaSymbol::Continuum, 0.1).unwrap();
        assert!((block.value - sum).norm() < 1e-8, "{} {sum}", block.value);
        assert_eq!(block.signature, 1);
        // the lattice symbol of a block operator is evaluated as one matrix
        let lattice = EtaSymbol::Lattice { h: 0.25 };
        let lsum: C64 =
            parts.iter().map(|&a| eta_invariant(&BoundaryOperator::scalar(a), ProjectionKind::Graph, lattice, 0.1).unwrap().value).sum();
        let lblock = eta_invariant(&BoundaryOperator::diagonal(&parts), ProjectionKind::Graph, lattice, 0.1).unwrap();
        assert!((lblock.value - lsum).norm() < 1e-8, "{} {lsum}", lblock.value);
    }

    #[test]
    fn decay_fits_identify_the_integrand_shape() {
        let a = BoundaryOperator::scalar(1.5);
        let w = eta_invariant(&a, ProjectionKind::Wassermann, EtaSymbol::Continuum, 0.1).unwrap().decay.unwrap();
        assert!((w.gaussian_rate - 1.0).abs() < 1e-4 && w.gaussian_rms < 1e-4, "{w:?}");
        let g = eta_invariant(&a, ProjectionKind::Graph, EtaSymbol::Continuum, 0.1).unwrap().decay.unwrap();
        assert!(g.power_rms < g.gaussian_rms && (g.power_exponent - 3.0).abs() < 0.2, "{g:?}");
    }
}
