//! Graph and Wassermann projections of `D = [[0, D⁻], [D⁺, 0]]` with their
//! analytic derivatives along a direction `dD⁺`.

use serde::{Deserialize, Serialize};

use crate::linalg::{eye, inverse, CMat, HermEig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    Graph,
    Wassermann,
}

impl std::str::FromStr for ProjectionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(ProjectionKind::Graph),
            "wassermann" => Ok(ProjectionKind::Wassermann),
            _ => Err(Error::Parse(format!("unknown projection kind {s:?}"))),
        }
    }
}

fn blocks(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let (n, m) = (tl.nrows(), br.nrows());
    let mut out = crate::linalg::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(tl);
    out.view_mut((0, n), (n, m)).copy_from(tr);
    out.view_mut((n, 0), (m, n)).copy_from(bl);
    out.view_mut((n, n), (m, m)).copy_from(br);
    out
}

fn check_pair(dplus: &CMat, dminus: &CMat) -> Result<()> {
    if dminus.shape() != (dplus.ncols(), dplus.nrows()) {
        return Err(Error::Shape("D⁻ must have the transposed shape of D⁺".into()));
    }
    Ok(())
}

/// `e_D = [[R, R D⁻], [D⁺ R, 1 − R']]`, `R = (1 + D⁻D⁺)⁻¹`, `R' = (1 + D⁺D⁻)⁻¹`.
pub fn graph_projection(dplus: &CMat, dminus: &CMat) -> Result<CMat> {
    check_pair(dplus, dminus)?;
    let (m, n) = dplus.shape();
    let r = inverse(&(eye(n) + dminus * dplus))?;
    let rp = inverse(&(eye(m) + dplus * dminus))?;
    Ok(blocks(&r, &(&r * dminus), &(dplus * &r), &(eye(m) - rp)))
}

/// Derivative of [`graph_projection`] along `(dD⁺, dD⁻)`.
pub fn graph_projection_derivative(dplus: &CMat, dminus: &CMat, ddplus: &CMat, ddminus: &CMat) -> Result<CMat> {
    check_pair(dplus, dminus)?;
    let (m, n) = dplus.shape();
    let r = inverse(&(eye(n) + dminus * dplus))?;
    let rp = inverse(&(eye(m) + dplus * dminus))?;
    let dr = -(&r * (ddminus * dplus + dminus * ddplus) * &r);
    let drp = -(&rp * (ddplus * dminus + dplus * ddminus) * &rp);
    Ok(blocks(&dr, &(&dr * dminus + &r * ddminus), &(ddplus * &r + dplus * &dr), &(-drp)))
}

fn exp_neg(x: f64) -> f64 {
    (-x).exp()
}

/// `g(x) = (1 − e^{−x})/x` and its derivative, with series near zero.
fn g_and_derivative(x: f64) -> (f64, f64) {
    if x < 1.0 {
        // g = Σ_k (−x)^k/(k+1)!,  g' = −Σ_k (k+1)(−x)^k/(k+2)!
        let (mut g, mut gp) = (0.0, 0.0);
        let mut pow_fact = 1.0; // (−x)^k/(k+1)!
        for k in 0..30 {
            g += pow_fact;
            gp -= pow_fact * (k as f64 + 1.0) / (k as f64 + 2.0);
            pow_fact *= -x / (k as f64 + 2.0);
        }
        (g, gp)
    } else {
        let e = (-x).exp();
        ((1.0 - e) / x, (e * (1.0 + x) - 1.0) / (x * x))
    }
}

/// `f(x) = e^{−x/2} g(x)^{1/2}`.
fn f2(x: f64) -> f64 {
    let x = x.max(0.0);
    ((-x).exp() * g_and_derivative(x).0).sqrt()
}

fn f2_prime(x: f64) -> f64 {
    let x = x.max(0.0);
    let (g, gp) = g_and_derivative(x);
    0.5 * f2(x) * (gp / g - 1.0)
}

/// `W_D = [[e^{−A}, f(A) D⁻], [D⁺ f(A), 1 − e^{−B}]]` with `A = D⁻D⁺`,
/// `B = D⁺D⁻` and `f(x) = e^{−x/2}((1 − e^{−x})/x)^{1/2}`.
pub fn wassermann_projection(dplus: &CMat, dminus: &CMat) -> Result<CMat> {
    check_pair(dplus, dminus)?;
    let m = dplus.nrows();
    let ea = HermEig::new(&(dminus * dplus));
    let eb = HermEig::new(&(dplus * dminus));
    let fa = ea.apply(f2);
    Ok(blocks(&ea.apply(exp_neg), &(&fa * dminus), &(dplus * &fa), &(eye(m) - eb.apply(exp_neg))))
}

pub fn wassermann_projection_derivative(dplus: &CMat, dminus: &CMat, ddplus: &CMat, ddminus: &CMat) -> Result<CMat> {
    check_pair(dplus, dminus)?;
    let ea = HermEig::new(&(dminus * dplus));
    let eb = HermEig::new(&(dplus * dminus));
    let da = ddminus * dplus + dminus * ddplus;
    let db = ddplus * dminus + dplus * ddminus;
    let neg_exp_prime = |x: f64| -(-x).exp();
    let d_tl = ea.derivative(&da, exp_neg, neg_exp_prime);
    let d_br = -eb.derivative(&db, exp_neg, neg_exp_prime);
    let fa = ea.apply(f2);
    let dfa = ea.derivative(&da, f2, f2_prime);
    Ok(blocks(&d_tl, &(&dfa * dminus + &fa * ddminus), &(ddplus * &fa + dplus * &dfa), &d_br))
}

/// Projection of `X = D⁺` with `D⁻ = X†`.
pub fn projection(kind: ProjectionKind, x: &CMat) -> Result<CMat> {
    match kind {
        ProjectionKind::Graph => graph_projection(x, &x.adjoint()),
        ProjectionKind::Wassermann => wassermann_projection(x, &x.adjoint()),
    }
}

/// Derivative of [`projection`] along `dX` (with `dD⁻ = dX†`).
pub fn projection_derivative(kind: ProjectionKind, x: &CMat, dx: &CMat) -> Result<CMat> {
    match kind {
        ProjectionKind::Graph => graph_projection_derivative(x, &x.adjoint(), dx, &dx.adjoint()),
        ProjectionKind::Wassermann => wassermann_projection_derivative(x, &x.adjoint(), dx, &dx.adjoint()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_defect, max_abs, zeros};
    use crate::random::Rng;

    #[test]
    fn zero_operator_projects_on_first_component() {
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let p = projection(kind, &zeros(2, 2)).unwrap();
            let want = crate::linalg::diag_real(&[1.0, 1.0, 0.0, 0.0]);
            assert!(max_abs(&(p - want)) < 1e-15);
        }
    }

    #[test]
    fn scalar_graph_projection() {
        let p = graph_projection(&CMat::from_element(1, 1, c(1.0, 0.0)), &CMat::from_element(1, 1, c(1.0, 0.0))).unwrap();
        assert!(max_abs(&(p - CMat::from_element(2, 2, c(0.5, 0.0)))) < 1e-15);
    }

    #[test]
    fn random_projections_are_orthogonal_projections() {
        let mut rng = Rng::seeded(21);
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let x = rng.matrix(6, 6);
            let p = projection(kind, &x).unwrap();
            assert!(max_abs(&(&p * &p - &p)) < 1e-12);
            assert!(hermitian_defect(&p) < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = Rng::seeded(22);
        let x = rng.matrix(3, 3) * c(0.7, 0.0);
        let dx = rng.matrix(3, 3);
        let h = 1e-6;
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let fd = (projection(kind, &(&x + &dx * c(h, 0.0))).unwrap() - projection(kind, &(&x - &dx * c(h, 0.0))).unwrap())
                / c(2.0 * h, 0.0);
            let an = projection_derivative(kind, &x, &dx).unwrap();
            assert!(max_abs(&(fd - an)) < 1e-7, "{kind:?}");
        }
    }

    #[test]
    fn series_and_closed_form_agree() {
        for x in [0.5, 0.999, 1.0, 1.001, 2.0] {
            let (g, gp) = g_and_derivative(x);
            let e = (-x).exp();
            assert!((g - (1.0 - e) / x).abs() < 1e-14);
            assert!((gp - (e * (1.0 + x) - 1.0) / (x * x)).abs() < 1e-12);
        }
        assert_eq!(g_and_derivative(0.0), (1.0, -0.5));
    }
}
