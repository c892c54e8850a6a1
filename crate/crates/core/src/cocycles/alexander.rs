//! Alexander-Spanier cocycles on a Galois covering toy.
//!
//! A decomposable cochain is a list of terms `i`, each a list of functions
//! `f^{(i)}_1, …, f^{(i)}_p`; the derivations are `δ^{(i)}_j k = [k, f^{(i)}_j]`.
//! Summing a term over its group orbit makes the total cochain invariant.

use crate::cocycles::toy::FoliatedToy;
use crate::cocycles::traces::{regularized_weight, weight_omega};
use crate::cocycles::Weight;
use crate::cyclic::{cyclicize, factorial, permutations, suspend, Cochain, CutOrder, Derivation, SuspensionData};
use crate::kernel::{compose, CompactKernel, ExtendedKernel, InvariantKernel, Multiplier};
use crate::linalg::{c, C64};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct AsData {
    pub functions: Vec<Vec<Multiplier>>,
    pub weight: Weight,
}

impl AsData {
    fn p(&self) -> Result<usize> {
        let p = self.functions.first().map(|f| f.len()).unwrap_or(0);
        if self.functions.iter().any(|f| f.len() != p) {
            return Err(Error::Shape("decomposable terms of different lengths".into()));
        }
        Ok(p)
    }

    /// Fiber functions on the cylinder, per term.
    pub fn cylinder_functions(&self) -> Vec<Vec<Vec<C64>>> {
        self.functions.iter().map(|t| t.iter().map(|f| f.cylinder()).collect()).collect()
    }
}

/// Sums each term over the orbit of the group of `toy`.
pub fn orbit_terms(toy: &FoliatedToy, term: &[Multiplier]) -> Result<Vec<Vec<Multiplier>>> {
    (0..toy.q).map(|k| term.iter().map(|f| toy.translate_multiplier(f, k)).collect()).collect()
}

fn check_even(p: usize) -> Result<()> {
    if p % 2 == 1 {
        return Err(Error::Invariant(format!("degree {p} is odd; only even degrees are supported")));
    }
    Ok(())
}

/// `τ_φ(k₀,…,k_p) = (1/p!) Σ_α Σ_i sign(α) ω(k₀ δ^{(i)}_{α(1)}k₁ ⋯ δ^{(i)}_{α(p)}k_p)`.
pub fn as_tau_phi(k: &[CompactKernel], d: &AsData) -> Result<C64> {
    let p = d.p()?;
    check_even(p)?;
    if k.len() != p + 1 {
        return Err(Error::Arity { degree: p, got: k.len() });
    }
    let mut acc = c(0.0, 0.0);
    for term in &d.functions {
        let derived: Vec<Vec<CompactKernel>> = term
            .iter()
            .map(|f| k.iter().map(|x| x.commutator(f).map(|y| y.scale(c(-1.0, 0.0)))).collect())
            .collect::<Result<_>>()?;
        for (perm, sign) in permutations(p) {
            let mut prod = k[0].clone();
            for (j, &a) in perm.iter().enumerate() {
                prod = prod.mul(&derived[a][j + 1])?;
            }
            acc += weight_omega(&prod, &d.weight)? * sign;
        }
    }
    Ok(acc / factorial(p))
}

pub fn as_tau_phi_cochain(d: AsData, p: usize) -> Cochain<CompactKernel> {
    Cochain::new(p, "tau_phi", move |k: &[CompactKernel]| as_tau_phi(k, &d))
}

/// The same sum on the extended algebra with the regularized weight.
pub fn as_psi_r(k: &[ExtendedKernel], d: &AsData) -> Result<C64> {
    let p = d.p()?;
    check_even(p)?;
    if k.len() != p + 1 {
        return Err(Error::Arity { degree: p, got: k.len() });
    }
    let mut acc = c(0.0, 0.0);
    for term in &d.functions {
        let derived: Vec<Vec<ExtendedKernel>> = term
            .iter()
            .map(|f| k.iter().map(|x| x.commutator(f).map(|y| y.scale(c(-1.0, 0.0)))).collect())
            .collect::<Result<_>>()?;
        for (perm, sign) in permutations(p) {
            let mut prod = k[0].clone();
            for (j, &a) in perm.iter().enumerate() {
                prod = compose(&prod, &derived[a][j + 1])?;
            }
            acc += regularized_weight(&prod, &d.weight)? * sign;
        }
    }
    Ok(acc / factorial(p))
}

/// `τ_φ^r`, the cyclic average of the regularized sum.
pub fn as_tau_phi_r_cochain(d: AsData, p: usize) -> Cochain<ExtendedKernel> {
    let psi = Cochain::new(p, "psi_phi_r", move |k: &[ExtendedKernel]| as_psi_r(k, &d));
    let c = cyclicize(&psi);
    Cochain::new(p, "tau_phi_r", move |k: &[ExtendedKernel]| c.eval(k))
}

/// `σ_φ(ℓ₀,…,ℓ_{p+1})`: the suspension of every decomposable term with the
/// cutoff commutator in the given order.
pub fn as_sigma_phi_cochain(functions: &[Vec<Vec<C64>>], weight: &Weight, hs: f64, lambda: usize, order: CutOrder) -> Result<Cochain<InvariantKernel>> {
    let p = functions.first().map(|f| f.len()).unwrap_or(0);
    let terms = functions
        .iter()
        .map(|term| {
            let data = SuspensionData {
                fiber_diag: weight.fiber_diag(hs),
                derivations: term.iter().map(|f| Derivation::Right(f.clone())).collect(),
                lambda,
                order,
            };
            (c(1.0, 0.0), suspend(data, "sigma_phi_term"))
        })
        .collect();
    let out = Cochain::combination("sigma_phi", terms)?;
    debug_assert_eq!(out.degree(), p + 1);
    Ok(out)
}
