//! Godbillon-Vey cocycles: `τ_GV` on the ideal, its regularization on the
//! extended algebra, and the eta cochain `σ_GV` on the cylinder.

use std::sync::Arc;

use crate::cocycles::traces::{regularized_weight, weight_omega};
use crate::cocycles::Weight;
use crate::cyclic::{cyclicize, suspend, Cochain, CutOrder, Derivation, RelativeCochain, SuspensionData};
use crate::kernel::{compose, project_pi, CompactKernel, ExtendedKernel, InvariantKernel, Multiplier};
use crate::linalg::C64;
use crate::Result;

/// Multipliers `φ, φ̇` and the weight `ω`.
#[derive(Clone, Debug)]
pub struct GvData {
    pub phi: Multiplier,
    pub phidot: Multiplier,
    pub weight: Weight,
}

impl GvData {
    fn hs(&self) -> f64 {
        self.phi.geometry().hs
    }
}

/// `τ_GV(a₀,a₁,a₂) = ½ ω(a₀[φ,a₁][φ̇,a₂] − a₀[φ̇,a₁][φ,a₂])`.
pub fn gv_tau(a0: &CompactKernel, a1: &CompactKernel, a2: &CompactKernel, d: &GvData) -> Result<C64> {
    let x = a0.mul(&a1.commutator(&d.phi)?)?.mul(&a2.commutator(&d.phidot)?)?;
    let y = a0.mul(&a1.commutator(&d.phidot)?)?.mul(&a2.commutator(&d.phi)?)?;
    Ok((weight_omega(&x, &d.weight)? - weight_omega(&y, &d.weight)?) * 0.5)
}

pub fn gv_tau_cochain(d: GvData) -> Cochain<CompactKernel> {
    Cochain::new(2, "tau_gv", move |a: &[CompactKernel]| gv_tau(&a[0], &a[1], &a[2], &d))
}

/// `ψ^r(k₀,k₁,k₂) = ½ ω^r(k₀[φ,k₁][φ̇,k₂] − k₀[φ̇,k₁][φ,k₂])`.
pub fn gv_psi_r(k0: &ExtendedKernel, k1: &ExtendedKernel, k2: &ExtendedKernel, d: &GvData) -> Result<C64> {
    let x = compose(&compose(k0, &k1.commutator(&d.phi)?)?, &k2.commutator(&d.phidot)?)?;
    let y = compose(&compose(k0, &k1.commutator(&d.phidot)?)?, &k2.commutator(&d.phi)?)?;
    Ok((regularized_weight(&x, &d.weight)? - regularized_weight(&y, &d.weight)?) * 0.5)
}

pub fn gv_psi_r_cochain(d: GvData) -> Cochain<ExtendedKernel> {
    Cochain::new(2, "psi_gv_r", move |k: &[ExtendedKernel]| gv_psi_r(&k[0], &k[1], &k[2], &d))
}

/// `τ_GV^r`, the cyclic average of `ψ^r`.
pub fn gv_tau_r_cochain(d: GvData) -> Cochain<ExtendedKernel> {
    let c = cyclicize(&gv_psi_r_cochain(d));
    Cochain::new(2, "tau_gv_r", move |k: &[ExtendedKernel]| c.eval(k))
}

pub fn gv_tau_r(k0: &ExtendedKernel, k1: &ExtendedKernel, k2: &ExtendedKernel, d: &GvData) -> Result<C64> {
    gv_tau_r_cochain(d.clone()).eval(&[k0.clone(), k1.clone(), k2.clone()])
}

/// `σ_GV` with the cutoff `χ^λ`, built from the cylinder values of `φ, φ̇`.
pub fn gv_sigma_cochain(phi_cyl: &[C64], phidot_cyl: &[C64], weight: &Weight, hs: f64, lambda: usize) -> Cochain<InvariantKernel> {
    let data = SuspensionData {
        fiber_diag: weight.fiber_diag(hs),
        derivations: vec![Derivation::Left(phi_cyl.to_vec()), Derivation::Left(phidot_cyl.to_vec())],
        lambda,
        order: CutOrder::ChiFirst,
    };
    suspend(data, "sigma_gv")
}

pub fn gv_sigma(l: &[InvariantKernel], d: &GvData, lambda: usize) -> Result<C64> {
    gv_sigma_cochain(&d.phi.cylinder(), &d.phidot.cylinder(), &d.weight, d.hs(), lambda).eval(l)
}

/// The relative pair `(τ_GV^r, σ_GV)`.
pub fn gv_relative(d: GvData, lambda: usize) -> RelativeCochain<ExtendedKernel, InvariantKernel> {
    let sigma = gv_sigma_cochain(&d.phi.cylinder(), &d.phidot.cylinder(), &d.weight, d.hs(), lambda);
    RelativeCochain::new(gv_tau_r_cochain(d), sigma).expect("degrees 2 and 3")
}

/// The homomorphism `π` as a shareable closure.
pub fn pi_map() -> Arc<dyn Fn(&ExtendedKernel) -> InvariantKernel + Send + Sync> {
    Arc::new(project_pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::toy::{Domain, FoliatedToy};
    use crate::linalg::c;
    use crate::random::Rng;

    #[test]
    fn equal_multipliers_give_zero() {
        let toy = FoliatedToy::new(2, 2, 1, 0, 1, vec![1.0, 1.0], 1.0).unwrap();
        let g = toy.geometry(10, 2, 2, 4, 1.0).unwrap();
        let mut rng = Rng::seeded(2);
        let cyl = toy.random_fiber_function(&mut rng);
        let phi = toy.random_multiplier(&mut rng, &g, &cyl, 2, true).unwrap();
        let d = GvData { phi: phi.clone(), phidot: phi, weight: toy.weight(Domain::FirstBlock).unwrap() };
        let a: Vec<_> = (0..3).map(|_| toy.random_compact(&mut rng, &g, 2).unwrap()).collect();
        assert!(gv_tau(&a[0], &a[1], &a[2], &d).unwrap().norm() < 1e-13);
    }

    #[test]
    fn matches_hand_expanded_sum() {
        // two leaf sites, point transversal, trivial group, unit volumes
        let toy = FoliatedToy::new(1, 2, 1, 0, 1, vec![1.0, 1.0], 1.0).unwrap();
        let g = toy.geometry(6, 0, 1, 2, 1.0).unwrap();
        let mut rng = Rng::seeded(9);
        let o = g.offset(0);
        let blocks: Vec<_> = (0..3).map(|_| rng.matrix(2, 2)).collect();
        let a: Vec<_> = blocks
            .iter()
            .map(|b| {
                let mut m = crate::linalg::zeros(g.dim(), g.dim());
                m.view_mut((o, o), (2, 2)).copy_from(b);
                CompactKernel::new(g.clone(), m).unwrap()
            })
            .collect();
        let (p, q) = ([0.3, -1.1], [2.0, 0.7]);
        let mk = |v: [f64; 2]| {
            let vals = (0..g.dim()).map(|i| c(v[i % 2], 0.0)).collect();
            Multiplier::new(g.clone(), vals, 0).unwrap()
        };
        let d = GvData { phi: mk(p), phidot: mk(q), weight: toy.weight(Domain::FirstBlock).unwrap() };
        let mut hand = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let prod = blocks[0][(i, j)] * blocks[1][(j, k)] * blocks[2][(k, i)];
                    hand += prod * 0.5 * ((p[j] - p[k]) * (q[k] - q[i]) - (q[j] - q[k]) * (p[k] - p[i]));
                }
            }
        }
        let got = gv_tau(&a[0], &a[1], &a[2], &d).unwrap();
        assert!((got - hand).norm() < 1e-13, "{got} vs {hand}");
    }
}
