//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use etacalc_core::dirac::{DiracModel, ModelSpec, Preset, ProjectionKind};
use etacalc_core::index::pairing::{excision_check, SWEEP};
use etacalc_core::report::{ResidualRecord, ResidualReport};
use etacalc_core::suites::*;
use etacalc_core::Result;

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_records(records: Result<Vec<ResidualRecord>>, budget_s: Option<f64>, elapsed: f64) -> Outcome {
    let records = match records {
        Ok(r) => r,
        Err(e) => return Outcome { passed: false, detail: format!("error: {e}") },
    };
    let mut report = ResidualReport::new("acceptance");
    report.extend(records);
    let parts: Vec<String> = report
        .summaries()
        .iter()
        .map(|s| format!("{} max {:.2e} ≤ {:.0e} over {} ({} failed)", s.identity, s.max_residual, s.tolerance, s.trials, s.failures))
        .collect();
    let in_budget = budget_s.map_or(true, |b| elapsed < b);
    let budget = budget_s.map_or(String::new(), |b| format!(" budget {b:.0}s"));
    Outcome { passed: report.passed() && in_budget, detail: format!("{}; {elapsed:.1}s{budget}", parts.join("; ")) }
}

fn timed(budget_s: Option<f64>, f: impl FnOnce() -> Result<Vec<ResidualRecord>>) -> Outcome {
    let clock = Instant::now();
    let r = f();
    from_records(r, budget_s, clock.elapsed().as_secs_f64())
}

fn chain(parts: Vec<Result<Vec<ResidualRecord>>>) -> Result<Vec<ResidualRecord>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn excision(preset: Preset) -> String {
    let clock = Instant::now();
    let model = match DiracModel::from_spec(&ModelSpec::preset(preset)) {
        Ok(m) => m,
        Err(e) => return format!("{}: error {e}", preset.name()),
    };
    match excision_check(preset.name(), &model, ProjectionKind::Graph) {
        Ok(r) => {
            let elapsed = clock.elapsed().as_secs_f64();
            let ok = r.passed && (-1..=1).contains(&r.oracle_index) && elapsed < 300.0;
            format!(
                "{}{}: absolute {:.10} relative {:.10} (bulk {:.6} + eta {:.6}) oracle {} |abs−rel| {:.2e} ≤ {:.0e} |abs−oracle| {:.2e} ≤ {:.0e}; {elapsed:.1}s budget 300s",
                if ok { "" } else { "FAILED " },
                r.preset,
                r.absolute.re,
                r.relative_total.re,
                r.relative_bulk.re,
                r.relative_eta.re,
                r.oracle_index,
                r.excision_error,
                r.tolerances.excision,
                r.oracle_error,
                r.tolerances.oracle,
            )
        }
        Err(e) => format!("FAILED {}: error {e}", preset.name()),
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: usize, name: &str, o: Outcome| {
        println!("{} criterion {n} [{name}]: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    };

    line(1, "melrose commutator", timed(Some(10.0), || melrose_commutator(SEED, TRIALS_MELROSE)));
    line(2, "roe lambda independence", timed(None, || roe_lambda_independence(SEED, TRIALS_LAMBDA)));
    line(3, "roe equals melrose", timed(None, || chain(vec![roe_equals_melrose(SEED, TRIALS_SYMBOL), shift_anchor(SEED)])));
    line(4, "hilbert identity", timed(None, || hilbert_identity(SEED, TRIALS_HILBERT)));
    line(5, "regularized via section", timed(None, || section_compatibility(SEED, TRIALS_SECTION)));
    line(6, "godbillon-vey suite", timed(Some(60.0), || gv_identities(SEED, TRIALS_GV)));
    line(7, "alexander-spanier suite", timed(None, || as_identities(SEED, TRIALS_AS, 2)));

    let parts: Vec<String> = [Preset::TanhCrossing, Preset::CircleDiracWithTwist].into_iter().map(excision).collect();
    let ok = parts.iter().all(|p| !p.starts_with("FAILED"));
    line(8, "excision index theorem", Outcome { passed: ok, detail: parts.join(" | ") });

    line(
        9,
        "eta symmetry and rescaling",
        timed(None, || {
            let mut out = Vec::new();
            for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
                out.extend(eta_symmetry(SEED, TRIALS_ETA, kind)?);
            }
            for preset in [Preset::TanhCrossing, Preset::CircleDiracWithTwist] {
                let model = DiracModel::from_spec(&ModelSpec::preset(preset))?;
                out.push(rescaling_records(&model, ProjectionKind::Graph, &SWEEP, SEED)?.1);
            }
            Ok(out)
        }),
    );

    println!(
        "EXCLUDED criterion 10 [analytic local term]: the Godbillon-Vey local index term on genuine foliated 4-manifolds and statements needing C*-completions or the S-operation are out of reach of finite lattices; covered by criteria 6 and 7"
    );

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
