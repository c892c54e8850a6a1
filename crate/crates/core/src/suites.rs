//! Seeded identity suites.
//!
//! Each runner draws `trials` independent inputs, trial `i` from the seed
//! `seed + i`, and returns one [`ResidualRecord`] per identity and trial.
//! Trials are mapped through [`crate::par`], so the records do not depend on
//! the execution policy.

use std::sync::Arc;

use crate::cocycles::alexander::{as_sigma_phi_cochain, as_tau_phi_cochain, as_tau_phi_r_cochain, orbit_terms, AsData};
use crate::cocycles::gv::{gv_relative, gv_sigma_cochain, gv_tau_cochain, pi_map, GvData};
use crate::cocycles::toy::{Domain, FoliatedToy};
use crate::cocycles::traces::{
    hilbert_identity_check, hilbert_multiplier_oracle, melrose_s1, melrose_s1_coefficients, reflect_by_cut,
    regularized_trace, regularized_weight, roe_sigma1, roe_sigma1_cochain, trace_tau0, weight_omega, Sequence,
};
use crate::cocycles::Weight;
use crate::cyclic::{hochschild_b, relative_coboundary, Cochain, CutOrder, RelativeCochain};
use crate::geometry::GridGeometry;
use crate::kernel::{compose, project_pi, section_t, CompactKernel, ExtendedKernel, InvariantKernel};
use crate::dirac::{BoundaryOperator, DiracModel, ProjectionKind, TGrid};
use crate::index::gv_eta::{gv_transgression, GvFiber, GvTransgression};
use crate::index::eta::{eta_invariant, EtaSymbol};
use crate::index::pairing::{relative_pairing, rescaling_sweep, SweepPoint};
use crate::linalg::{c, diag_real, HermEig, C64};
use crate::par::map_range;
use crate::random::Rng;
use crate::report::ResidualRecord;
use crate::Result;

pub const TOL_MELROSE: f64 = 1e-10;
pub const TOL_LAMBDA: f64 = 1e-12;
pub const TOL_SYMBOL: f64 = 1e-10;
pub const TOL_HILBERT: f64 = 1e-10;
pub const TOL_SECTION: f64 = 1e-12;
pub const TOL_COCYCLE: f64 = 1e-10;

/// Trial counts used by the acceptance runs.
pub const TRIALS_MELROSE: usize = 100;
pub const TRIALS_LAMBDA: usize = 50;
pub const TRIALS_SYMBOL: usize = 100;
pub const TRIALS_HILBERT: usize = 50;
pub const TRIALS_SECTION: usize = 50;
pub const TRIALS_GV: usize = 50;
pub const TRIALS_AS: usize = 20;

/// Smallest cylinder depth in the commutator check.
pub const MELROSE_WINDOW: usize = 20;

/// Cut depths swept by the λ-independence checks.
pub const LAMBDAS: [usize; 6] = [0, 1, 2, 3, 4, 5];

fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

fn run<F>(seed: u64, trials: usize, f: F) -> Result<Vec<ResidualRecord>>
where
    F: Fn(u64) -> Result<Vec<ResidualRecord>> + Sync + Send,
{
    let per_trial = map_range(trials, |i| f(trial_seed(seed, i)));
    let mut out = Vec::new();
    for r in per_trial {
        out.extend(r?);
    }
    Ok(out)
}

/// Random fiber with volumes in `[0.5, 1.5)` and slice step in `[0.5, 1.5)`.
fn random_geometry(rng: &mut Rng, n_y: usize, depth: usize, length: usize, bandwidth: usize, lambda0: usize) -> Result<Arc<GridGeometry>> {
    let vol: Vec<f64> = (0..n_y).map(|_| rng.range(0.5, 1.5)).collect();
    let hs = rng.range(0.5, 1.5);
    Ok(Arc::new(GridGeometry::new(n_y, depth, length, bandwidth, lambda0, hs, vol)?))
}

/// Band kernel with blocks of entry size about `1/(n_y (2w + 1))`.
fn random_band(rng: &mut Rng, weights: Vec<f64>, w: usize) -> Result<InvariantKernel> {
    let n = weights.len();
    let s = 1.0 / (n * (2 * w + 1)) as f64;
    InvariantKernel::from_fn(weights, w, |_| rng.matrix(n, n).scale(s))
}

fn random_extended(rng: &mut Rng, geom: &Arc<GridGeometry>, w: usize, lambda: usize) -> Result<ExtendedKernel> {
    let tail = random_band(rng, geom.fiber_weights(), w)?;
    let k = (geom.length + lambda) * geom.n_y;
    let core = rng.matrix(k, k).scale(1.0 / k as f64);
    ExtendedKernel::from_tail_and_core(geom.clone(), tail, &core, lambda)
}

fn dims(rng: &mut Rng) -> (usize, usize) {
    (1 + rng.index(3), 1 + rng.index(2))
}

/// `τ₀ʳ([k, k′]) = σ₁(πk, πk′)` for random extended kernels with
/// `n_y ≤ 4` and bandwidth `≤ 3`.
pub fn melrose_commutator(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let (n_y, w) = (1 + rng.index(4), 1 + rng.index(3));
        let (lam_a, lam_b) = (rng.index(3), rng.index(3));
        let lambda0 = lam_a.max(lam_b) + w;
        let depth = (lambda0 + 4 * w + 4).max(MELROSE_WINDOW);
        let geom = random_geometry(&mut rng, n_y, depth, 4 * w, 2 * w, lambda0)?;
        let a = random_extended(&mut rng, &geom, w, lam_a)?;
        let b = random_extended(&mut rng, &geom, w, lam_b)?;
        let lhs = regularized_trace(&compose(&a, &b)?.sub(&compose(&b, &a)?)?)?;
        let rhs = roe_sigma1(&project_pi(&a), &project_pi(&b), 0, &geom)?;
        Ok(vec![ResidualRecord::new("melrose-commutator", 1, s, (lhs - rhs).norm(), TOL_MELROSE)])
    })
}

/// `σ₁^λ` does not depend on the cut, on the window route and on the
/// suspension route.
pub fn roe_lambda_independence(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let (n_y, w) = dims(&mut rng);
        let lam_max = *LAMBDAS.last().expect("nonempty");
        let geom = random_geometry(&mut rng, n_y, lam_max + 4 * w + 4, 4 * w, 2 * w, lam_max)?;
        let l0 = random_band(&mut rng, geom.fiber_weights(), w)?;
        let l1 = random_band(&mut rng, geom.fiber_weights(), w)?;
        let fiber = geom.fiber_weights();
        let base_window = roe_sigma1(&l0, &l1, 0, &geom)?;
        let base_suspension = roe_sigma1_cochain(&fiber, 0).eval(&[l0.clone(), l1.clone()])?;
        let (mut window, mut suspension) = (0.0f64, 0.0f64);
        for &lam in &LAMBDAS[1..] {
            window = window.max((roe_sigma1(&l0, &l1, lam, &geom)? - base_window).norm());
            let v = roe_sigma1_cochain(&fiber, lam).eval(&[l0.clone(), l1.clone()])?;
            suspension = suspension.max((v - base_suspension).norm());
        }
        Ok(vec![
            ResidualRecord::new("roe-lambda-window", 1, s, window, TOL_LAMBDA),
            ResidualRecord::new("roe-lambda-suspension", 1, s, suspension, TOL_LAMBDA),
        ])
    })
}

/// `σ₁ = 𝔰₁` against the symbol integral and the coefficient sum.
pub fn roe_equals_melrose(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let (n_y, w) = dims(&mut rng);
        let w = w + rng.index(2);
        let geom = random_geometry(&mut rng, n_y, 4 * w + 4, 4 * w, 2 * w, 0)?;
        let l0 = random_band(&mut rng, geom.fiber_weights(), w)?;
        let l1 = random_band(&mut rng, geom.fiber_weights(), w)?;
        let roe = roe_sigma1(&l0, &l1, 0, &geom)?;
        Ok(vec![
            ResidualRecord::new("roe-eq-melrose-symbol", 1, s, (roe - melrose_s1(&l0, &l1)).norm(), TOL_SYMBOL),
            ResidualRecord::new("roe-eq-melrose-coefficients", 1, s, (roe - melrose_s1_coefficients(&l0, &l1)).norm(), TOL_SYMBOL),
        ])
    })
}

/// The shift pair `(V⁻¹, V)` on a unit scalar fiber pairs to `−1` on both
/// routes.
pub fn shift_anchor(seed: u64) -> Result<Vec<ResidualRecord>> {
    let geom = Arc::new(GridGeometry::uniform(1, 8, 4, 2, 0)?);
    let down = InvariantKernel::shift(vec![1.0], -1);
    let up = InvariantKernel::shift(vec![1.0], 1);
    let target = c(-1.0, 0.0);
    Ok(vec![
        ResidualRecord::new("shift-anchor-roe", 1, seed, (roe_sigma1(&down, &up, 0, &geom)? - target).norm(), TOL_SYMBOL),
        ResidualRecord::new("shift-anchor-melrose", 1, seed, (melrose_s1(&down, &up) - target).norm(), TOL_SYMBOL),
    ])
}

/// `(ℋ f̂)ˇ = (1 − 2χ⁰) f` by the cotangent kernel and by the coefficient
/// multiplier.
pub fn hilbert_identity(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let len = 1 + rng.index(24);
        let offset = rng.index(25) as i64 - 12;
        let values = (0..len).map(|_| rng.complex()).collect();
        let f = Sequence { offset, values };
        let want = reflect_by_cut(&f);
        let oracle = hilbert_multiplier_oracle(&f);
        let oracle_err = oracle
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let n = oracle.offset + i as i64 - want.offset;
                let w = if (0..want.values.len() as i64).contains(&n) { want.values[n as usize] } else { c(0.0, 0.0) };
                (v - w).norm()
            })
            .fold(0.0, f64::max);
        Ok(vec![
            ResidualRecord::new("hilbert-cotangent", 1, s, hilbert_identity_check(&f), TOL_HILBERT),
            ResidualRecord::new("hilbert-multiplier", 1, s, oracle_err, TOL_HILBERT),
        ])
    })
}

/// `τ₀ʳ = τ₀ ∘ t` and `ωʳ = ω ∘ t` on random extended kernels.
pub fn section_compatibility(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let (n_y, w) = dims(&mut rng);
        let lam = w + rng.index(3);
        let geom = random_geometry(&mut rng, n_y, lam + 2 * w + 3, 2, w, lam)?;
        let k = random_extended(&mut rng, &geom, w, lam)?;
        let t = section_t(&k)?;
        let mask: Vec<f64> = (0..n_y).map(|_| f64::from(rng.index(2) as u8)).collect();
        let weight = Weight::new(mask, geom.vol_y.clone())?;
        Ok(vec![
            ResidualRecord::new("trace-section", 0, s, (regularized_trace(&k)? - trace_tau0(&t)).norm(), TOL_SECTION),
            ResidualRecord::new(
                "weight-section",
                0,
                s,
                (regularized_weight(&k, &weight)? - weight_omega(&t, &weight)?).norm(),
                TOL_SECTION,
            ),
        ])
    })
}

fn norm_of(z: Result<C64>) -> Result<f64> {
    z.map(|v| v.norm())
}

/// Small covering toy with group `ℤ₂`.
pub fn gv_toy() -> Result<FoliatedToy> {
    FoliatedToy::new(2, 2, 2, 1, 1, vec![1.0, 1.5], 0.5)
}

/// Inputs of one Godbillon-Vey trial.
pub struct GvTrial {
    pub data: GvData,
    pub cyl_phi: Vec<C64>,
    pub cyl_phidot: Vec<C64>,
    pub hs: f64,
    pub lambda: usize,
    pub compact: Vec<CompactKernel>,
    pub invariant: Vec<InvariantKernel>,
    pub extended: Vec<ExtendedKernel>,
}

impl GvTrial {
    pub fn draw(toy: &FoliatedToy, seed: u64) -> Result<Self> {
        let mut rng = Rng::seeded(seed);
        let w = 1;
        let lambda = 1 + rng.index(2);
        let lambda0 = lambda + 4 * w;
        let hs = rng.range(0.5, 1.5);
        let geom = toy.geometry(lambda0 + 8 * w + 3, 1, 4 * w, lambda0, hs)?;
        let scale = c(1.0 / (toy.n_y() as f64).sqrt(), 0.0);
        let cyl_phi = toy.random_fiber_function(&mut rng);
        let cyl_phidot = toy.random_fiber_function(&mut rng);
        let phi = toy.random_multiplier(&mut rng, &geom, &cyl_phi, lambda, true)?;
        let phidot = toy.random_multiplier(&mut rng, &geom, &cyl_phidot, lambda, true)?;
        let data = GvData { phi, phidot, weight: toy.weight(Domain::Interleaved)? };
        let compact = (0..4).map(|_| toy.random_compact(&mut rng, &geom, 2).map(|k| k.scale(scale))).collect::<Result<_>>()?;
        let invariant = (0..5).map(|_| toy.random_invariant(&mut rng, geom.fiber_weights(), w).map(|l| l.scale(scale))).collect::<Result<_>>()?;
        let extended = (0..4).map(|_| toy.random_extended(&mut rng, &geom, w, lambda).map(|k| k.scale(scale))).collect::<Result<_>>()?;
        Ok(GvTrial { data, cyl_phi, cyl_phidot, hs, lambda, compact, invariant, extended })
    }

    pub fn sigma(&self, lambda: usize) -> Cochain<InvariantKernel> {
        gv_sigma_cochain(&self.cyl_phi, &self.cyl_phidot, &self.data.weight, self.hs, lambda)
    }

    pub fn relative(&self) -> RelativeCochain<ExtendedKernel, InvariantKernel> {
        gv_relative(self.data.clone(), self.lambda)
    }
}

/// Godbillon-Vey checks: `bτ_GV = 0`, `bσ_GV = 0`, `bτ_GVʳ = π*σ_GV` and
/// λ-independence of `σ_GV`.
pub fn gv_identities(seed: u64, trials: usize) -> Result<Vec<ResidualRecord>> {
    let toy = gv_toy()?;
    run(seed, trials, |s| {
        let t = GvTrial::draw(&toy, s)?;
        let b_tau = norm_of(hochschild_b(&gv_tau_cochain(t.data.clone())).eval(&t.compact))?;
        let b_sigma = norm_of(hochschild_b(&t.sigma(t.lambda)).eval(&t.invariant))?;
        let args = &t.invariant[..4];
        let base = t.sigma(0).eval(args)?;
        let mut spread = 0.0f64;
        for &l in &LAMBDAS[1..] {
            spread = spread.max((t.sigma(l).eval(args)? - base).norm());
        }
        let rel = relative_coboundary(&t.relative(), pi_map())?;
        let transgression = norm_of(rel.tau.eval(&t.extended))?;
        Ok(vec![
            ResidualRecord::new("gv-tau-cocycle", 2, s, b_tau, TOL_COCYCLE),
            ResidualRecord::new("gv-sigma-cocycle", 3, s, b_sigma, TOL_COCYCLE),
            ResidualRecord::new("gv-relative", 2, s, transgression, TOL_COCYCLE),
            ResidualRecord::new("gv-sigma-lambda", 3, s, spread, TOL_COCYCLE),
        ])
    })
}

/// Order of the cutoff commutator making `(τ_φʳ, σ_φ)` relative.
pub const AS_ORDER: CutOrder = CutOrder::ChiFirst;

/// Inputs of one Alexander-Spanier trial in degree `p`.
pub struct AsTrial {
    pub data: AsData,
    pub p: usize,
    pub hs: f64,
    pub lambda: usize,
    pub compact: Vec<CompactKernel>,
    pub invariant: Vec<InvariantKernel>,
    pub extended: Vec<ExtendedKernel>,
}

impl AsTrial {
    pub fn draw(toy: &FoliatedToy, seed: u64, p: usize) -> Result<Self> {
        let mut rng = Rng::seeded(seed);
        let w = 1;
        let lambda = 1 + rng.index(2);
        let lambda0 = lambda + (p + 2) * w;
        let hs = rng.range(0.5, 1.5);
        let geom = toy.geometry(lambda0 + 2 * (p + 2) * w + 3, 1, (p + 2) * w, lambda0, hs)?;
        let scale = c(1.0 / (toy.n_y() as f64).sqrt(), 0.0);
        let term: Vec<_> = (0..p)
            .map(|_| {
                let cyl = toy.random_plain_function(&mut rng);
                toy.random_multiplier(&mut rng, &geom, &cyl, lambda, false)
            })
            .collect::<Result<_>>()?;
        let data = AsData { functions: orbit_terms(toy, &term)?, weight: toy.weight(Domain::FirstBlock)? };
        let compact = (0..p + 2).map(|_| toy.random_compact(&mut rng, &geom, 2).map(|k| k.scale(scale))).collect::<Result<_>>()?;
        let invariant = (0..p + 3).map(|_| toy.random_invariant(&mut rng, geom.fiber_weights(), w).map(|l| l.scale(scale))).collect::<Result<_>>()?;
        let extended = (0..p + 2).map(|_| toy.random_extended(&mut rng, &geom, w, lambda).map(|k| k.scale(scale))).collect::<Result<_>>()?;
        Ok(AsTrial { data, p, hs, lambda, compact, invariant, extended })
    }

    pub fn relative(&self) -> Result<RelativeCochain<ExtendedKernel, InvariantKernel>> {
        let sigma = as_sigma_phi_cochain(&self.data.cylinder_functions(), &self.data.weight, self.hs, self.lambda, AS_ORDER)?;
        RelativeCochain::new(as_tau_phi_r_cochain(self.data.clone(), self.p), sigma)
    }
}

/// Alexander-Spanier checks in even degree `p`: `bτ_φ = 0`, `bσ_φ = 0`
/// and `bτ_φʳ = π*σ_φ`.
pub fn as_identities(seed: u64, trials: usize, p: usize) -> Result<Vec<ResidualRecord>> {
    let toy = gv_toy()?;
    run(seed, trials, |s| {
        let t = AsTrial::draw(&toy, s, p)?;
        let b_tau = norm_of(hochschild_b(&as_tau_phi_cochain(t.data.clone(), p)).eval(&t.compact))?;
        let rel = relative_coboundary(&t.relative()?, pi_map())?;
        let b_sigma = norm_of(rel.sigma.eval(&t.invariant))?;
        let transgression = norm_of(rel.tau.eval(&t.extended))?;
        Ok(vec![
            ResidualRecord::new("as-tau-cocycle", p, s, b_tau, TOL_COCYCLE),
            ResidualRecord::new("as-sigma-cocycle", p + 1, s, b_sigma, TOL_COCYCLE),
            ResidualRecord::new("as-relative", p, s, transgression, TOL_COCYCLE),
        ])
    })
}

pub const TOL_ETA_ODD: f64 = 1e-8;
pub const TOL_ETA_TAIL: f64 = 1e-8;
pub const TOL_SWEEP: f64 = 1e-4;
pub const TRIALS_ETA: usize = 6;

/// Hermitian `A` of size `1..=3` with eigenvalues of modulus in `[0.5, 2)`.
fn random_gapped(rng: &mut Rng) -> Result<BoundaryOperator> {
    let n = 1 + rng.index(3);
    let u = HermEig::new(&rng.hermitian(n)).vectors;
    let d: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.0 { -1.0 } else { 1.0 } * rng.range(0.5, 2.0)).collect();
    let a = &u * diag_real(&d) * u.adjoint();
    BoundaryOperator::new((&a + a.adjoint()).scale(0.5))
}

/// `η(−A) = −η(A)` and the tail bound for the continuum symbol.
pub fn eta_symmetry(seed: u64, trials: usize, kind: ProjectionKind) -> Result<Vec<ResidualRecord>> {
    run(seed, trials, |s| {
        let mut rng = Rng::seeded(s);
        let a = random_gapped(&mut rng)?;
        let plus = eta_invariant(&a, kind, EtaSymbol::Continuum, 0.25)?;
        let minus = eta_invariant(&a.scaled(-1.0), kind, EtaSymbol::Continuum, 0.25)?;
        let tail = plus.integral.tail().max(minus.integral.tail());
        Ok(vec![
            ResidualRecord::new("eta-odd", 1, s, (plus.value + minus.value).norm(), TOL_ETA_ODD),
            ResidualRecord::new("eta-tail", 1, s, tail, TOL_ETA_TAIL),
        ])
    })
}

/// Relative totals of `sD` over `scales`, with the spread recorded against
/// the unscaled model.
pub fn rescaling_records(model: &DiracModel, kind: ProjectionKind, scales: &[f64], seed: u64) -> Result<(Vec<SweepPoint>, ResidualRecord)> {
    let points = rescaling_sweep(model, kind, scales)?;
    let reference = relative_pairing(model, kind)?.total;
    let spread = points.iter().map(|p| (p.total - reference).norm()).fold(0.0, f64::max);
    Ok((points, ResidualRecord::new("rescaling-sweep", 1, seed, spread, TOL_SWEEP)))
}

/// Degree-3 Godbillon-Vey transgression integrand on the `ℤ₂` covering of a
/// two-point circle, with the λ-spread of each sample as a record.
pub fn gv_transgression_samples(seed: u64, kind: ProjectionKind, tgrid: &TGrid) -> Result<(GvTransgression, Vec<ResidualRecord>)> {
    let toy = FoliatedToy::covering(2, 1, 1)?;
    let mut rng = Rng::seeded(seed);
    let h0 = toy.project_block(&rng.hermitian(toy.n_y()));
    // spectrum in ±[1.7, 2.3] keeps the kernels short at h = 0.5
    let a = BoundaryOperator::new(HermEig::new(&h0).apply(|x| x.signum() * (1.7 + 0.6 * x.abs().min(1.0))))?;
    let fiber = GvFiber {
        phi: toy.random_plain_function(&mut rng),
        phidot: toy.random_plain_function(&mut rng),
        weight: toy.weight(Domain::Interleaved)?,
    };
    let r = gv_transgression(&a, 0.5, kind, &fiber, tgrid)?;
    let records = r.samples.iter().map(|x| ResidualRecord::new("gv-eta-lambda", 3, seed, x.lambda_spread, TOL_COCYCLE)).collect();
    Ok((r, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::gv::pi_map;

    fn all_pass(r: &[ResidualRecord]) {
        for x in r {
            assert!(x.passed, "{} seed {}: {:e} > {:e}", x.identity, x.seed, x.residual, x.tolerance);
        }
    }

    #[test]
    fn degree_one_suites_pass_on_a_few_seeds() {
        all_pass(&melrose_commutator(7, 5).unwrap());
        all_pass(&roe_lambda_independence(7, 5).unwrap());
        all_pass(&roe_equals_melrose(7, 5).unwrap());
        all_pass(&shift_anchor(7).unwrap());
        all_pass(&hilbert_identity(7, 5).unwrap());
        all_pass(&section_compatibility(7, 5).unwrap());
    }

    #[test]
    fn melrose_commutator_is_not_trivial() {
        let mut rng = Rng::seeded(3);
        let geom = random_geometry(&mut rng, 2, 10, 4, 2, 2).unwrap();
        let a = random_extended(&mut rng, &geom, 1, 1).unwrap();
        let b = random_extended(&mut rng, &geom, 1, 1).unwrap();
        assert!(roe_sigma1(&project_pi(&a), &project_pi(&b), 0, &geom).unwrap().norm() > 1e-3);
    }

    #[test]
    fn eta_checks_pass_on_one_seed() {
        all_pass(&eta_symmetry(2, 1, ProjectionKind::Graph).unwrap());
    }

    #[test]
    fn records_do_not_depend_on_the_trial_count() {
        let a = hilbert_identity(11, 3).unwrap();
        let b = hilbert_identity(11, 5).unwrap();
        assert_eq!(a[..], b[..a.len()]);
    }

    #[test]
    fn gv_pullback_is_not_degenerate() {
        let t = GvTrial::draw(&gv_toy().unwrap(), 4).unwrap();
        let v = t.relative().sigma.pullback(pi_map()).eval(&t.extended).unwrap();
        assert!(v.norm() > 1e-4, "{v}");
        all_pass(&gv_identities(4, 1).unwrap());
    }

    #[test]
    fn as_pullback_is_not_degenerate() {
        let t = AsTrial::draw(&gv_toy().unwrap(), 4, 2).unwrap();
        let v = t.relative().unwrap().sigma.pullback(pi_map()).eval(&t.extended).unwrap();
        assert!(v.norm() > 1e-4, "{v}");
        all_pass(&as_identities(4, 1, 2).unwrap());
    }

    #[test]
    fn the_other_cut_order_breaks_the_relative_condition() {
        let t = AsTrial::draw(&gv_toy().unwrap(), 5, 2).unwrap();
        let sigma = as_sigma_phi_cochain(&t.data.cylinder_functions(), &t.data.weight, t.hs, t.lambda, CutOrder::KernelFirst).unwrap();
        let rc = RelativeCochain::new(as_tau_phi_r_cochain(t.data.clone(), 2), sigma).unwrap();
        let r = relative_coboundary(&rc, pi_map()).unwrap().tau.eval(&t.extended).unwrap();
        assert!(r.norm() > 1e-6, "{r}");
    }
}
