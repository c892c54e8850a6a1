//! Cyclic cochain calculus.
//!
//! Cochains are closures over kernel data evaluated on demand. The cyclic
//! operator acts by `(λψ)(a₀,…,a_k) = (−1)^k ψ(a_k, a₀, …, a_{k−1})`.

use std::fmt;
use std::sync::Arc;

use crate::kernel::{compose, CompactKernel, ExtendedKernel, InvariantKernel};
use crate::linalg::{c, C64};
use crate::window::CutWindow;
use crate::{Error, Result};

/// An associative algebra carrying cochain arguments.
pub trait Algebra: Clone + Send + Sync + 'static {
    fn mul(&self, other: &Self) -> Result<Self>;
}

impl Algebra for ExtendedKernel {
    fn mul(&self, other: &Self) -> Result<Self> {
        compose(self, other)
    }
}

impl Algebra for CompactKernel {
    fn mul(&self, other: &Self) -> Result<Self> {
        CompactKernel::mul(self, other)
    }
}

impl Algebra for InvariantKernel {
    fn mul(&self, other: &Self) -> Result<Self> {
        self.convolve(other)
    }
}

type EvalFn<A> = dyn Fn(&[A]) -> Result<C64> + Send + Sync;

/// Degree-`k` multilinear functional of `k + 1` arguments.
pub struct Cochain<A> {
    degree: usize,
    name: String,
    eval: Arc<EvalFn<A>>,
}

impl<A> Clone for Cochain<A> {
    fn clone(&self) -> Self {
        Cochain { degree: self.degree, name: self.name.clone(), eval: self.eval.clone() }
    }
}

impl<A> fmt::Debug for Cochain<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cochain({}, degree {})", self.name, self.degree)
    }
}

impl<A: Algebra> Cochain<A> {
    pub fn new(degree: usize, name: impl Into<String>, eval: impl Fn(&[A]) -> Result<C64> + Send + Sync + 'static) -> Self {
        Cochain { degree, name: name.into(), eval: Arc::new(eval) }
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(degree, "0", |_| Ok(c(0.0, 0.0)))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, args: &[A]) -> Result<C64> {
        if args.len() != self.degree + 1 {
            return Err(Error::Arity { degree: self.degree, got: args.len() });
        }
        (self.eval)(args)
    }

    /// Linear combination `Σ zᵢ ψᵢ` of cochains of one degree.
    pub fn combination(name: impl Into<String>, terms: Vec<(C64, Cochain<A>)>) -> Result<Self> {
        let degree = terms.first().map(|t| t.1.degree).unwrap_or(0);
        if terms.iter().any(|t| t.1.degree != degree) {
            return Err(Error::Shape("combining cochains of different degrees".into()));
        }
        Ok(Self::new(degree, name, move |args| {
            terms.iter().try_fold(c(0.0, 0.0), |acc, (z, psi)| Ok(acc + z * psi.eval(args)?))
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combination(format!("{} - {}", self.name, other.name), vec![(c(1.0, 0.0), self.clone()), (c(-1.0, 0.0), other.clone())])
    }

    /// Pullback along a homomorphism `π: B → A`.
    pub fn pullback<B: Algebra>(&self, pi: Arc<dyn Fn(&B) -> A + Send + Sync>) -> Cochain<B> {
        let psi = self.clone();
        Cochain::new(self.degree, format!("pi*{}", self.name), move |args: &[B]| {
            let mapped: Vec<A> = args.iter().map(|b| pi(b)).collect();
            psi.eval(&mapped)
        })
    }
}

/// `(bψ)(a₀,…,a_{k+1}) = Σ_{i≤k} (−1)^i ψ(…, a_i a_{i+1}, …) + (−1)^{k+1} ψ(a_{k+1}a₀, a₁, …, a_k)`.
pub fn hochschild_b<A: Algebra>(psi: &Cochain<A>) -> Cochain<A> {
    let k = psi.degree;
    let inner = psi.clone();
    Cochain::new(k + 1, format!("b{}", psi.name), move |a: &[A]| {
        let mut acc = c(0.0, 0.0);
        for i in 0..=k {
            let mut args = Vec::with_capacity(k + 1);
            args.extend_from_slice(&a[..i]);
            args.push(a[i].mul(&a[i + 1])?);
            args.extend_from_slice(&a[i + 2..]);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += inner.eval(&args)? * sign;
        }
        let mut args = Vec::with_capacity(k + 1);
        args.push(a[k + 1].mul(&a[0])?);
        args.extend_from_slice(&a[1..=k]);
        let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += inner.eval(&args)? * sign;
        Ok(acc)
    })
}

/// `(1/(k+1)) Σ_j (−1)^{kj} ψ(a_j, …, a_{j−1})`.
pub fn cyclicize<A: Algebra>(psi: &Cochain<A>) -> Cochain<A> {
    let k = psi.degree;
    let inner = psi.clone();
    Cochain::new(k, format!("cyc {}", psi.name), move |a: &[A]| {
        let n = k + 1;
        let mut acc = c(0.0, 0.0);
        for j in 0..n {
            let args: Vec<A> = (0..n).map(|i| a[(i + j) % n].clone()).collect();
            let sign = if (k * j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += inner.eval(&args)? * sign;
        }
        Ok(acc / n as f64)
    })
}

/// `|ψ(a_k, a₀, …, a_{k−1}) − (−1)^k ψ(a₀, …, a_k)|`.
pub fn cyclicity_residual<A: Algebra>(psi: &Cochain<A>, a: &[A]) -> Result<f64> {
    let k = psi.degree;
    let mut rot = Vec::with_capacity(k + 1);
    rot.push(a[k].clone());
    rot.extend_from_slice(&a[..k]);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok((psi.eval(&rot)? - psi.eval(a)? * sign).norm())
}

/// Pair `(τ, σ)` with `τ` of degree `k` on `A` and `σ` of degree `k + 1` on `B`.
#[derive(Clone, Debug)]
pub struct RelativeCochain<A, B> {
    pub tau: Cochain<A>,
    pub sigma: Cochain<B>,
}

impl<A: Algebra, B: Algebra> RelativeCochain<A, B> {
    pub fn new(tau: Cochain<A>, sigma: Cochain<B>) -> Result<Self> {
        if sigma.degree != tau.degree + 1 {
            return Err(Error::Shape(format!("relative cochain degrees {} and {}", tau.degree, sigma.degree)));
        }
        Ok(RelativeCochain { tau, sigma })
    }

    pub fn degree(&self) -> usize {
        self.tau.degree
    }
}

/// `(τ, σ) ↦ (π*σ − bτ, bσ)`.
pub fn relative_coboundary<A: Algebra, B: Algebra>(
    rc: &RelativeCochain<A, B>,
    pi: Arc<dyn Fn(&A) -> B + Send + Sync>,
) -> Result<RelativeCochain<A, B>> {
    let tau = rc.sigma.pullback(pi).sub(&hochschild_b(&rc.tau))?;
    RelativeCochain::new(tau, hochschild_b(&rc.sigma))
}

/// Permutations of `0..n` in lexicographic order with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        out.push((p.clone(), if inversions % 2 == 0 { 1.0 } else { -1.0 }));
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Derivation of the invariant algebra by a fiber function.
#[derive(Clone, Debug)]
pub enum Derivation {
    /// `ℓ ↦ [φ, ℓ]`.
    Left(Vec<C64>),
    /// `ℓ ↦ [ℓ, f]`.
    Right(Vec<C64>),
}

/// Order of the cutoff commutator appended by [`suspend`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutOrder {
    /// `ℓ ↦ [χ^λ, ℓ]`.
    ChiFirst,
    /// `ℓ ↦ [ℓ, χ^λ]`.
    KernelFirst,
}

/// Weight, derivations and cutoff for a suspension.
#[derive(Clone, Debug)]
pub struct SuspensionData {
    /// `mask · volume · hs` per fiber site.
    pub fiber_diag: Vec<f64>,
    pub derivations: Vec<Derivation>,
    pub lambda: usize,
    pub order: CutOrder,
}

/// `σ(ℓ₀,…,ℓ_{k+1}) = (1/(k+1)!) Σ_α sign(α) ω(ℓ₀ δ_{α(1)}ℓ₁ ⋯ δ_{α(k+1)}ℓ_{k+1})`
/// where `δ₁…δ_k` are the given derivations and `δ_{k+1}` is the cutoff
/// commutator. Each summand carries the cutoff commutator once, so the
/// weighted diagonal is finitely supported.
pub fn suspend(data: SuspensionData, name: impl Into<String>) -> Cochain<InvariantKernel> {
    let k = data.derivations.len();
    Cochain::new(k + 1, name, move |l: &[InvariantKernel]| {
        let weights = l[0].weights().to_vec();
        if data.fiber_diag.len() != weights.len() {
            return Err(Error::Shape("weight and kernels live on different fibers".into()));
        }
        let reach: usize = l.iter().map(|x| x.radius()).sum();
        let win = CutWindow::new(&weights, data.lambda, reach);
        let dense: Vec<_> = l.iter().map(|x| win.dense(x)).collect();
        // derived[d][j] = δ_d(ℓ_j), j ≥ 1
        let mut derived = Vec::with_capacity(k + 1);
        for d in &data.derivations {
            let row: Vec<_> = dense
                .iter()
                .map(|m| match d {
                    Derivation::Left(phi) => win.fiber_commutator(phi, m),
                    Derivation::Right(f) => -win.fiber_commutator(f, m),
                })
                .collect();
            derived.push(row);
        }
        derived.push(
            dense
                .iter()
                .map(|m| match data.order {
                    CutOrder::ChiFirst => win.chi_commutator(m),
                    CutOrder::KernelFirst => -win.chi_commutator(m),
                })
                .collect(),
        );
        let head = win.near_rows(&dense[0]);
        let mut acc = c(0.0, 0.0);
        for (perm, sign) in permutations(k + 1) {
            let mut prod = head.clone();
            for (j, &d) in perm.iter().enumerate() {
                prod = win.mul(&prod, &derived[d][j + 1]);
            }
            acc += win.near_trace(&prod, &data.fiber_diag) * sign;
        }
        Ok(acc / factorial(k + 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct Num(C64);
    impl Algebra for Num {
        fn mul(&self, o: &Self) -> Result<Self> {
            Ok(Num(self.0 * o.0))
        }
    }

    #[test]
    fn permutations_are_lexicographic_with_signs() {
        let p = permutations(3);
        let orders: Vec<_> = p.iter().map(|x| x.0.clone()).collect();
        assert_eq!(orders, vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]);
        let signs: Vec<_> = p.iter().map(|x| x.1).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0, 1.0, -1.0]);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }

    #[test]
    fn b_of_trace_on_commutative_algebra_vanishes() {
        let tr = Cochain::new(0, "id", |a: &[Num]| Ok(a[0].0));
        let b = hochschild_b(&tr);
        let v = b.eval(&[Num(c(2.0, 1.0)), Num(c(-1.0, 3.0))]).unwrap();
        assert_eq!(v, c(0.0, 0.0));
        assert!(matches!(b.eval(&[Num(c(1.0, 0.0))]), Err(Error::Arity { degree: 1, got: 1 })));
    }

    #[test]
    fn cyclicized_cochain_is_cyclic() {
        let psi = Cochain::new(2, "psi", |a: &[Num]| Ok(a[0].0 * a[1].0 * a[1].0 * a[2].0.conj() + a[2].0));
        let cy = cyclicize(&psi);
        let args = [Num(c(0.3, 1.0)), Num(c(-1.2, 0.5)), Num(c(2.0, -0.7))];
        assert!(cyclicity_residual(&cy, &args).unwrap() < 1e-14);
        let again = cyclicize(&cy);
        assert!((again.eval(&args).unwrap() - cy.eval(&args).unwrap()).norm() < 1e-14);
    }
}
