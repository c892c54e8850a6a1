//! Absolute and relative index pairings of a one-ended lattice Dirac operator
//! and their comparison.
//!
//! The absolute pairing is `τ₀(e_Q) − τ₀(e₁)` for the Connes–Skandalis
//! projector of a glued parametrix. The relative pairing is the bulk term
//! `Σ_s (P − e₁)(s, s)` of the operator projection plus the transgression
//! integral `∫₁^∞` over the cylinder path. Both are evaluated mode by mode
//! when the base operator is not scalar. The spectral flow of the profile
//! family is the independent oracle.

use std::time::Instant;

use serde::Serialize;

use super::bulk::{bulk, cylinder_membership_residual, BulkTerm};
use super::eta::{transgression_integral, EtaIntegral};
use super::flow::{spectral_flow, Crossing, SpectralFlow};
use crate::dirac::{aps_parametrix, connes_skandalis_projector, DiracModel, ParametrixSummary, ProjectionKind};
use crate::linalg::{c, C64};
use crate::par::map_slice;
use crate::Result;

/// Gluing slice of the parametrix, in slices below the start of the interior.
pub const GLUING: i64 = -2;
/// Tolerance of `|absolute − relative|`.
pub const EXCISION_TOL: f64 = 1e-4;
/// Tolerance of `|absolute − oracle|`.
pub const ORACLE_TOL: f64 = 1e-6;
/// Rescalings of the cylinder variable in the invariance sweep.
pub const SWEEP: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Clone, Debug, Serialize)]
pub struct AbsolutePairing {
    pub value: C64,
    /// Worst idempotency defect of the per-mode projectors.
    pub idempotency: f64,
    pub parametrices: Vec<ParametrixSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelativePairing {
    pub kind: ProjectionKind,
    pub bulk: C64,
    pub eta: C64,
    pub total: C64,
    pub bulk_terms: Vec<BulkTerm>,
    pub eta_terms: Vec<EtaIntegral>,
}

impl RelativePairing {
    /// Worst upper-tail estimate of the transgression integrals.
    pub fn tail(&self) -> f64 {
        self.eta_terms.iter().map(EtaIntegral::tail).fold(0.0, f64::max)
    }

    pub fn edge_residual(&self) -> f64 {
        self.bulk_terms.iter().map(|b| b.edge_residual).fold(0.0, f64::max)
    }
}

pub fn absolute_pairing(model: &DiracModel, gluing: i64) -> Result<AbsolutePairing> {
    let modes = model.modes()?;
    let per: Vec<Result<(C64, f64, ParametrixSummary)>> = map_slice(&modes, |m| {
        let par = aps_parametrix(m, gluing)?;
        let cs = connes_skandalis_projector(&par)?;
        Ok((cs.tau0, cs.idempotency, par.summary()))
    });
    let mut out = AbsolutePairing { value: c(0.0, 0.0), idempotency: 0.0, parametrices: Vec::new() };
    for r in per {
        let (v, idem, s) = r?;
        out.value += v;
        out.idempotency = out.idempotency.max(idem);
        out.parametrices.push(s);
    }
    Ok(out)
}

pub fn relative_pairing(model: &DiracModel, kind: ProjectionKind) -> Result<RelativePairing> {
    relative_pairing_of_blocks(&model.modes()?, kind)
}

/// Relative pairing of a direct sum, term by term.
pub fn relative_pairing_of_blocks(modes: &[DiracModel], kind: ProjectionKind) -> Result<RelativePairing> {
    let per: Vec<Result<(BulkTerm, EtaIntegral)>> = map_slice(modes, |m| {
        let b = bulk(m, kind, m.window())?;
        let e = transgression_integral(&m.symbol(), kind, Some(1.0))?;
        Ok((b, e))
    });
    let mut out = RelativePairing {
        kind,
        bulk: c(0.0, 0.0),
        eta: c(0.0, 0.0),
        total: c(0.0, 0.0),
        bulk_terms: Vec::new(),
        eta_terms: Vec::new(),
    };
    for r in per {
        let (b, e) = r?;
        out.bulk += b.value;
        out.eta += e.value;
        out.bulk_terms.push(b);
        out.eta_terms.push(e);
    }
    out.total = out.bulk + out.eta;
    Ok(out)
}

/// Spectral flow of the scaled profile over the folded line.
pub fn oracle(model: &DiracModel) -> Result<SpectralFlow> {
    let family = model.profile_family();
    let len = model.line_length() as f64;
    spectral_flow(&family, -1.0, len + 1.0, 4 * model.line_length().max(1) as usize)
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub excision: f64,
    pub oracle: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Runtimes {
    pub absolute_s: f64,
    pub relative_s: f64,
    pub oracle_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub idempotency: f64,
    pub parametrix_deep: f64,
    pub pinv_dropped: usize,
    pub bulk_edge: f64,
    pub eta_tail: f64,
    pub eta_t_max: f64,
    pub eta_last_change: f64,
    /// Deep block of the dense projection against the cylinder kernel.
    pub membership: f64,
}

/// Result of comparing the absolute pairing, the relative pairing and the
/// spectral-flow oracle on one model.
#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub preset: String,
    pub kind: ProjectionKind,
    pub scale: f64,
    pub modes: usize,
    pub absolute: C64,
    pub relative_bulk: C64,
    pub relative_eta: C64,
    pub relative_total: C64,
    pub oracle_index: i64,
    pub excision_error: f64,
    pub oracle_error: f64,
    /// `|relative − oracle|`, reported.
    pub relative_oracle_error: f64,
    pub tolerances: Tolerances,
    pub passed: bool,
    pub runtimes: Runtimes,
    pub diagnostics: Diagnostics,
    pub crossings: Vec<Crossing>,
}

impl PairingReport {
    pub const CSV_HEADER: [&'static str; 14] = [
        "identity",
        "preset",
        "kind",
        "scale",
        "absolute_re",
        "absolute_im",
        "relative_bulk",
        "relative_eta",
        "relative_total_re",
        "relative_total_im",
        "oracle_index",
        "excision_error",
        "oracle_error",
        "passed",
    ];

    /// Runtimes are left to the JSON encoding so rows are reproducible.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            "excision".to_string(),
            self.preset.clone(),
            format!("{:?}", self.kind).to_lowercase(),
            self.scale.to_string(),
            self.absolute.re.to_string(),
            format!("{:e}", self.absolute.im),
            self.relative_bulk.re.to_string(),
            self.relative_eta.re.to_string(),
            self.relative_total.re.to_string(),
            format!("{:e}", self.relative_total.im),
            self.oracle_index.to_string(),
            format!("{:e}", self.excision_error),
            format!("{:e}", self.oracle_error),
            self.passed.to_string(),
        ]
    }
}

/// Absolute pairing, relative pairing and oracle for `model`.
pub fn excision_check(preset: &str, model: &DiracModel, kind: ProjectionKind) -> Result<PairingReport> {
    let clock = Instant::now();
    let abs = absolute_pairing(model, GLUING)?;
    let absolute_s = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let rel = relative_pairing(model, kind)?;
    let relative_s = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let flow = oracle(model)?;
    let oracle_s = clock.elapsed().as_secs_f64();
    let membership = map_slice(&model.modes()?, |m| cylinder_membership_residual(m, kind))
        .into_iter()
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))?;
    let excision_error = (abs.value - rel.total).norm();
    let oracle = c(flow.flow as f64, 0.0);
    let oracle_error = (abs.value - oracle).norm();
    let relative_oracle_error = (rel.total - oracle).norm();
    let tolerances = Tolerances { excision: EXCISION_TOL, oracle: ORACLE_TOL };
    let fold = |f: fn(&ParametrixSummary) -> f64| abs.parametrices.iter().map(f).fold(0.0, f64::max);
    let diagnostics = Diagnostics {
        idempotency: abs.idempotency,
        parametrix_deep: fold(|p| p.deep_residual),
        pinv_dropped: abs.parametrices.iter().map(|p| p.dropped).sum(),
        bulk_edge: rel.edge_residual(),
        eta_tail: rel.tail(),
        eta_t_max: rel.eta_terms.iter().map(|e| e.t_max).fold(0.0, f64::max),
        eta_last_change: rel.eta_terms.iter().map(|e| e.last_change).fold(0.0, f64::max),
        membership,
    };
    Ok(PairingReport {
        preset: preset.to_string(),
        kind,
        scale: model.scale(),
        modes: abs.parametrices.len(),
        absolute: abs.value,
        relative_bulk: rel.bulk,
        relative_eta: rel.eta,
        relative_total: rel.total,
        oracle_index: flow.flow,
        excision_error,
        oracle_error,
        relative_oracle_error,
        passed: excision_error <= tolerances.excision && oracle_error <= tolerances.oracle,
        tolerances,
        runtimes: Runtimes { absolute_s, relative_s, oracle_s },
        diagnostics,
        crossings: flow.crossings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub scale: f64,
    pub bulk: C64,
    pub eta: C64,
    pub total: C64,
}

/// Relative pairing of `s D` for each `s`. The split between bulk and
/// transgression moves with `s`; the total does not.
pub fn rescaling_sweep(model: &DiracModel, kind: ProjectionKind, scales: &[f64]) -> Result<Vec<SweepPoint>> {
    scales
        .iter()
        .map(|&s| {
            let r = relative_pairing(&model.scaled(s), kind)?;
            Ok(SweepPoint { scale: s * model.scale(), bulk: r.bulk, eta: r.eta, total: r.total })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KindComparison {
    pub graph: C64,
    pub wassermann: C64,
    pub difference: f64,
}

pub fn kind_comparison(model: &DiracModel) -> Result<KindComparison> {
    let graph = relative_pairing(model, ProjectionKind::Graph)?.total;
    let wassermann = relative_pairing(model, ProjectionKind::Wassermann)?.total;
    Ok(KindComparison { graph, wassermann, difference: (graph - wassermann).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{ModelSpec, Preset};

    fn model(p: Preset) -> DiracModel {
        DiracModel::from_spec(&ModelSpec::preset(p)).unwrap()
    }

    #[test]
    fn constant_model_pairs_to_zero() {
        let r = excision_check("constant", &model(Preset::Constant), ProjectionKind::Graph).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.oracle_index, 0);
        assert!(r.absolute.norm() < 1e-10 && r.relative_total.norm() < 1e-10);
    }

    #[test]
    fn crossing_model_pairs_to_one() {
        let m = model(Preset::TanhCrossing);
        let r = excision_check("tanh-crossing", &m, ProjectionKind::Graph).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.oracle_index, 1);
        assert!(r.diagnostics.idempotency < 1e-9 && r.diagnostics.membership < 1e-8, "{:?}", r.diagnostics);
        let serialized = serde_json::to_string(&r).unwrap();
        assert!(serialized.contains("\"relative_total\""));
        assert_eq!(r.csv_row().len(), PairingReport::CSV_HEADER.len());
    }

    #[test]
    fn reversed_crossing_pairs_to_minus_one() {
        let m = DiracModel::scalar(1.0, -1.0, 4.0, 0.5, 6, 40).unwrap();
        let r = excision_check("reversed", &m, ProjectionKind::Graph).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.oracle_index, -1);
    }

    #[test]
    fn rescaling_moves_the_split_not_the_total() {
        let sweep = rescaling_sweep(&model(Preset::TanhCrossing), ProjectionKind::Graph, &SWEEP).unwrap();
        for p in &sweep {
            assert!((p.total - c(1.0, 0.0)).norm() < ORACLE_TOL, "{p:?}");
        }
        assert!((sweep[0].bulk - sweep[2].bulk).norm() > 1e-3);
    }

    #[test]
    fn opposite_crossings_cancel_blockwise() {
        let up = DiracModel::scalar(-1.0, 1.0, 4.0, 0.5, 6, 40).unwrap();
        let down = DiracModel::scalar(1.0, -1.0, 4.0, 0.5, 6, 40).unwrap();
        let r = relative_pairing_of_blocks(&[up, down], ProjectionKind::Graph).unwrap();
        assert!(r.total.norm() < 1e-8, "{}", r.total);
        let (e1, e2) = (r.eta_terms[0].value, r.eta_terms[1].value);
        assert!((e1 + e2).norm() < 1e-8 && e1.norm() > 1e-2, "{e1} {e2}");
    }

    #[test]
    fn absolute_pairing_is_stable_under_window_enlargement() {
        let m = model(Preset::TanhCrossing);
        let a = absolute_pairing(&m, GLUING).unwrap().value;
        let b = absolute_pairing(&m.with_window(m.window() + 20), GLUING).unwrap().value;
        let d = absolute_pairing(&m, GLUING - 3).unwrap().value;
        assert!((a - b).norm() < 1e-6 && (a - d).norm() < 1e-6, "{a} {b} {d}");
    }

    #[test]
    fn wassermann_agrees_with_graph() {
        let k = kind_comparison(&model(Preset::TanhCrossing)).unwrap();
        assert!(k.difference < 1e-6, "{k:?}");
    }
}
