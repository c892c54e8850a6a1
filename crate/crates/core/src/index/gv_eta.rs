//! Degree-3 transgression integrand `σ_GV([ṗ_t, p_t], p_t, p_t, p_t)` on the
//! cylinder of a boundary operator over a foliated toy fiber.
//!
//! Each evaluation is a dense product over a window of width proportional to
//! the kernel bandwidth, so only a sampled, coarse integral over a finite
//! `t` range is offered.

use serde::Serialize;

use crate::cocycles::gv::gv_sigma_cochain;
use crate::cocycles::Weight;
use crate::dirac::{BoundaryOperator, ProjectionKind, ProjectionPath, Symbol, TGrid};
use crate::linalg::{c, C64};
use crate::Result;

/// Kernel entries below this are dropped before the dense evaluation.
pub const GV_TRUNCATION: f64 = 1e-11;

/// Fiber data of `σ_GV` on the undoubled fiber.
#[derive(Clone, Debug)]
pub struct GvFiber {
    pub phi: Vec<C64>,
    pub phidot: Vec<C64>,
    pub weight: Weight,
}

#[derive(Clone, Debug, Serialize)]
pub struct GvSample {
    pub t: f64,
    pub integrand: C64,
    pub bandwidth: usize,
    /// Largest change of the integrand over the cutoffs `λ ∈ {1, 2}`.
    pub lambda_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GvTransgression {
    pub t_min: f64,
    pub t_max: f64,
    /// Trapezoid rule in `ln t` over the samples.
    pub partial_integral: C64,
    pub samples: Vec<GvSample>,
}

fn doubled<T: Clone>(v: &[T]) -> Vec<T> {
    [v, v].concat()
}

/// The integrand at each `t` of `tgrid`, evaluated at cutoff `λ = 0` and
/// compared against `λ = 1, 2`.
pub fn gv_transgression(a: &BoundaryOperator, h: f64, kind: ProjectionKind, fiber: &GvFiber, tgrid: &TGrid) -> Result<GvTransgression> {
    tgrid.validate()?;
    let weight = Weight::new(doubled(fiber.weight.mask()), doubled(fiber.weight.volume()))?;
    let (phi, phidot) = (doubled(&fiber.phi), doubled(&fiber.phidot));
    let symbol = Symbol::lattice_cylinder(a, h);
    let samples = crate::par::map_slice(&tgrid.samples(), |&t| -> Result<GvSample> {
        let path = ProjectionPath::from_symbol(&symbol, h, kind, &[t])?;
        let p = path.samples[0].p.truncated(GV_TRUNCATION);
        let comm = path.commutator(0)?.truncated(GV_TRUNCATION);
        let args = [comm, p.clone(), p.clone(), p.clone()];
        let at = |lambda: usize| gv_sigma_cochain(&phi, &phidot, &weight, h, lambda).eval(&args);
        let integrand = at(0)?;
        let mut spread = 0.0f64;
        for lambda in [1, 2] {
            spread = spread.max((at(lambda)? - integrand).norm());
        }
        Ok(GvSample { t, integrand, bandwidth: p.radius().max(args[0].radius()), lambda_spread: spread })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut partial = c(0.0, 0.0);
    for w in samples.windows(2) {
        let du = (w[1].t / w[0].t).ln();
        partial += (w[0].integrand * w[0].t + w[1].integrand * w[1].t) * (0.5 * du);
    }
    Ok(GvTransgression { t_min: tgrid.t_min, t_max: tgrid.t_max, partial_integral: partial, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::toy::{Domain, FoliatedToy};
    use crate::linalg::HermEig;
    use crate::random::Rng;

    #[test]
    fn integrand_is_cutoff_independent_and_vanishes_for_finite_groups() {
        let toy = FoliatedToy::covering(2, 1, 1).unwrap();
        let mut rng = Rng::seeded(1);
        let h0 = toy.project_block(&rng.hermitian(toy.n_y()));
        let a = BoundaryOperator::new(HermEig::new(&h0).apply(|x| x.signum() * (1.7 + 0.6 * x.abs().min(1.0)))).unwrap();
        let fiber = GvFiber {
            phi: toy.random_plain_function(&mut rng),
            phidot: toy.random_plain_function(&mut rng),
            weight: toy.weight(Domain::Interleaved).unwrap(),
        };
        let grid = TGrid { t_min: 0.05, t_max: 0.2, points: 3 };
        let r = gv_transgression(&a, 0.5, ProjectionKind::Graph, &fiber, &grid).unwrap();
        for s in &r.samples {
            assert!(s.lambda_spread < 1e-12, "{s:?}");
            assert!(s.integrand.norm() < 1e-15, "{s:?}");
        }
    }
}
