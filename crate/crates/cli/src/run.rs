//! Suite runners. Each returns its artifacts in memory; nothing touches the
//! disk until the whole suite has finished.

use std::path::Path;
use std::time::Instant;

use etacalc_core::dirac::{BoundaryOperator, ModelSpec, Preset, ProjectionKind};
use etacalc_core::index::eta::{eta_invariant, signature_fit, transgression_integral, EtaReport, EtaSymbol};
use etacalc_core::index::pairing::{excision_check, PairingReport};
use etacalc_core::dirac::Symbol;
use etacalc_core::report::{ResidualRecord, ResidualReport};
use etacalc_core::suites;
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::svg::{Axis, Plot, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Eta,
    Aps,
    Gv,
    As,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Eta => "eta",
            Suite::Aps => "aps",
            Suite::Gv => "gv",
            Suite::As => "as",
        }
    }
}

/// Output of a finished suite.
pub struct SuiteOutput {
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub passed: bool,
    /// One line per failing identity or report.
    pub failures: Vec<String>,
}

type Result<T> = etacalc_core::Result<T>;

fn csv_bytes<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s.into_bytes()
}

fn kind_name(k: ProjectionKind) -> &'static str {
    match k {
        ProjectionKind::Graph => "graph",
        ProjectionKind::Wassermann => "wassermann",
    }
}

/// Applies tolerance overrides and collects the residual artifacts.
struct Residuals {
    report: ResidualReport,
}

impl Residuals {
    fn new(suite: &str) -> Self {
        Residuals { report: ResidualReport::new(suite) }
    }

    fn add(&mut self, cfg: &ExperimentConfig, records: Vec<ResidualRecord>) {
        self.report.extend(records.into_iter().map(|r| {
            let tol = cfg.tolerance(&r.identity, r.tolerance);
            ResidualRecord::new(r.identity, r.degree, r.seed, r.residual, tol)
        }));
    }

    fn finish(mut self, clock: Instant, out: &mut SuiteOutput) {
        self.report.runtime_s = clock.elapsed().as_secs_f64();
        let name = self.report.suite.clone();
        let rows = self.report.records.iter().map(|r| r.csv_row());
        out.artifacts.push((format!("{name}_residuals.csv"), csv_bytes(&ResidualRecord::CSV_HEADER, rows)));
        let summaries = self.report.summaries();
        for s in summaries.iter().filter(|s| s.failures > 0) {
            out.failures.push(format!("{}: {} of {} trials above {:e} (max {:e})", s.identity, s.failures, s.trials, s.tolerance, s.max_residual));
        }
        out.passed &= self.report.passed();
        let doc = json!({
            "suite": name,
            "passed": self.report.passed(),
            "runtime_s": self.report.runtime_s,
            "summaries": summaries,
            "records": self.report.records,
        });
        out.artifacts.push((format!("{name}_residuals.json"), json_bytes(&doc)));
    }
}

fn empty() -> SuiteOutput {
    SuiteOutput { artifacts: Vec::new(), passed: true, failures: Vec::new() }
}

pub fn run(suite: Suite, cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    match suite {
        Suite::Identities => identities(cfg),
        Suite::Gv => gv(cfg),
        Suite::As => alexander_spanier(cfg),
        Suite::Aps => aps(cfg),
        Suite::Eta => eta(cfg),
    }
}

fn identities(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let clock = Instant::now();
    let (s, t) = (cfg.seed, &cfg.trials);
    let mut res = Residuals::new("identities");
    res.add(cfg, suites::melrose_commutator(s, t.melrose)?);
    res.add(cfg, suites::roe_lambda_independence(s, t.lambda)?);
    res.add(cfg, suites::roe_equals_melrose(s, t.symbol)?);
    res.add(cfg, suites::shift_anchor(s)?);
    res.add(cfg, suites::hilbert_identity(s, t.hilbert)?);
    res.add(cfg, suites::section_compatibility(s, t.section)?);
    res.add(cfg, suites::gv_identities(s, t.gv)?);
    res.add(cfg, suites::as_identities(s, t.alexander_spanier, cfg.as_degree)?);
    let mut out = empty();
    res.finish(clock, &mut out);
    Ok(out)
}

fn gv(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let clock = Instant::now();
    let mut res = Residuals::new("gv");
    res.add(cfg, suites::gv_identities(cfg.seed, cfg.trials.gv)?);
    let mut out = empty();
    if cfg.gv_transgression {
        let mut rows = Vec::new();
        let mut series = Vec::new();
        let mut docs = Vec::new();
        for &kind in &cfg.kinds {
            let (tr, records) = suites::gv_transgression_samples(cfg.seed, kind, &cfg.gv_tgrid)?;
            res.add(cfg, records);
            for x in &tr.samples {
                rows.push(vec![
                    "gv-eta-integrand".to_string(),
                    kind_name(kind).to_string(),
                    format!("{:e}", x.t),
                    format!("{:e}", x.integrand.re),
                    format!("{:e}", x.integrand.im),
                    x.bandwidth.to_string(),
                    format!("{:e}", x.lambda_spread),
                ]);
            }
            series.push(Series { name: kind_name(kind).into(), points: tr.samples.iter().map(|x| (x.t, x.integrand.norm())).collect() });
            docs.push(json!({ "kind": kind_name(kind), "transgression": tr }));
        }
        out.artifacts.push((
            "gv_transgression.csv".into(),
            csv_bytes(&["identity", "kind", "t", "integrand_re", "integrand_im", "bandwidth", "lambda_spread"], rows),
        ));
        out.artifacts.push(("gv_transgression.json".into(), json_bytes(&docs)));
        let plot = Plot {
            title: "degree-3 transgression integrand".into(),
            x_label: "t".into(),
            y_label: "|integrand|".into(),
            x_axis: Axis::Log,
            y_axis: Axis::Linear,
            series,
        };
        out.artifacts.push(("gv_transgression.svg".into(), plot.render().into_bytes()));
    }
    res.finish(clock, &mut out);
    Ok(out)
}

fn alexander_spanier(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let clock = Instant::now();
    let mut res = Residuals::new("as");
    res.add(cfg, suites::as_identities(cfg.seed, cfg.trials.alexander_spanier, cfg.as_degree)?);
    let mut out = empty();
    res.finish(clock, &mut out);
    Ok(out)
}

fn aps(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut out = empty();
    let mut reports: Vec<PairingReport> = Vec::new();
    for &p in &cfg.presets {
        let (_, model) = cfg.model_for(p).map_err(|e| etacalc_core::Error::Parse(e.to_string()))?;
        for &kind in &cfg.kinds {
            let mut r = excision_check(p.name(), &model, kind)?;
            r.tolerances.excision = cfg.tolerance("excision", r.tolerances.excision);
            r.tolerances.oracle = cfg.tolerance("oracle", r.tolerances.oracle);
            r.passed = r.excision_error <= r.tolerances.excision && r.oracle_error <= r.tolerances.oracle;
            if !r.passed {
                out.failures.push(format!(
                    "excision {} ({}): |absolute − relative| = {:e}, |absolute − oracle| = {:e}",
                    p.name(),
                    kind_name(kind),
                    r.excision_error,
                    r.oracle_error
                ));
            }
            out.passed &= r.passed;
            reports.push(r);
        }
    }
    out.artifacts.push(("aps_summary.csv".into(), csv_bytes(&PairingReport::CSV_HEADER, reports.iter().map(|r| r.csv_row()))));
    out.artifacts.push(("aps_report.json".into(), json_bytes(&reports)));
    Ok(out)
}

#[derive(Serialize)]
struct EtaEntry {
    a: f64,
    symbol: &'static str,
    kind: &'static str,
    /// `∫₁^∞` of the same integrand, the piece entering relative pairings.
    from_one: f64,
    report: EtaReport,
}

fn eta(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let clock = Instant::now();
    let mut res = Residuals::new("eta");
    let mut out = empty();
    let mut entries = Vec::new();
    let mut fits = Vec::new();
    let mut decay_series = Vec::new();
    let h = match cfg.presets.first() {
        Some(&p) => cfg.model_for(p).map_err(|e| etacalc_core::Error::Parse(e.to_string()))?.0.h,
        None => ModelSpec::preset(Preset::TanhCrossing).h,
    };
    for &kind in &cfg.kinds {
        res.add(cfg, suites::eta_symmetry(cfg.seed, cfg.trials.eta, kind)?);
        let mut continuum = Vec::new();
        for &a in &cfg.eta_values {
            let op = BoundaryOperator::scalar(a);
            for (symbol, name) in [(EtaSymbol::Continuum, "continuum"), (EtaSymbol::Lattice { h }, "lattice")] {
                let r = eta_invariant(&op, kind, symbol, a.abs() / 2.0)?;
                let sym = match symbol {
                    EtaSymbol::Continuum => Symbol::continuum(&op),
                    EtaSymbol::Lattice { h } => Symbol::lattice_cylinder(&op, h),
                };
                let from_one = transgression_integral(&sym, kind, Some(1.0))?.value.re;
                if symbol == EtaSymbol::Continuum {
                    if a > 0.0 {
                        decay_series.push(Series {
                            name: format!("{} a={a}", kind_name(kind)),
                            points: r.integral.samples.iter().map(|&(t, i)| (t, i.abs())).collect(),
                        });
                    }
                    continuum.push(r.clone());
                }
                entries.push(EtaEntry { a, symbol: name, kind: kind_name(kind), from_one, report: r });
            }
        }
        fits.push(json!({ "kind": kind_name(kind), "signature_coefficient": signature_fit(&continuum) }));
    }

    let mut sweep_rows = Vec::new();
    let mut sweep_series = Vec::new();
    for &p in &cfg.presets {
        let (spec, model) = cfg.model_for(p).map_err(|e| etacalc_core::Error::Parse(e.to_string()))?;
        let (points, record) = suites::rescaling_records(&model, spec.kind, &cfg.sweep, cfg.seed)?;
        res.add(cfg, vec![record]);
        for x in &points {
            sweep_rows.push(vec![
                "rescaling-sweep".to_string(),
                p.name().to_string(),
                kind_name(spec.kind).to_string(),
                x.scale.to_string(),
                x.bulk.re.to_string(),
                x.eta.re.to_string(),
                x.total.re.to_string(),
            ]);
        }
        for (label, f) in [("bulk", 0usize), ("eta", 1), ("total", 2)] {
            let pts = points.iter().map(|x| (x.scale, [x.bulk.re, x.eta.re, x.total.re][f])).collect();
            sweep_series.push(Series { name: format!("{} {label}", p.name()), points: pts });
        }
    }

    let rows = entries.iter().map(|e| {
        let d = e.report.decay.as_ref();
        vec![
            "eta-invariant".to_string(),
            e.a.to_string(),
            e.symbol.to_string(),
            e.kind.to_string(),
            e.report.value.re.to_string(),
            e.report.value.im.to_string(),
            e.from_one.to_string(),
            e.report.signature.to_string(),
            format!("{:e}", e.report.integral.tail()),
            d.map_or(String::new(), |d| d.power_exponent.to_string()),
            d.map_or(String::new(), |d| d.gaussian_rate.to_string()),
        ]
    });
    let header =
        ["identity", "a", "symbol", "kind", "eta_re", "eta_im", "from_one", "signature", "tail", "power_exponent", "gaussian_rate"];
    out.artifacts.push(("eta_invariants.csv".into(), csv_bytes(&header, rows)));
    let integrand_rows = entries.iter().flat_map(|e| {
        e.report.integral.samples.iter().map(move |&(t, i)| vec!["eta-integrand".to_string(), e.a.to_string(), e.symbol.to_string(), e.kind.to_string(), format!("{t:e}"), format!("{i:e}")])
    });
    out.artifacts.push(("eta_integrand.csv".into(), csv_bytes(&["identity", "a", "symbol", "kind", "t", "integrand"], integrand_rows)));
    out.artifacts.push((
        "eta_sweep.csv".into(),
        csv_bytes(&["identity", "preset", "kind", "scale", "bulk", "eta", "total"], sweep_rows),
    ));
    out.artifacts.push(("eta_invariants.json".into(), json_bytes(&json!({ "entries": entries, "signature_fits": fits }))));
    let decay = Plot {
        title: "eta integrand decay".into(),
        x_label: "t".into(),
        y_label: "|I(t)|".into(),
        x_axis: Axis::Log,
        y_axis: Axis::Log,
        series: decay_series,
    };
    out.artifacts.push(("eta_integrand.svg".into(), decay.render().into_bytes()));
    let sweep = Plot {
        title: "relative pairing under D ↦ sD".into(),
        x_label: "s".into(),
        y_label: "value".into(),
        x_axis: Axis::Log,
        y_axis: Axis::Linear,
        series: sweep_series,
    };
    out.artifacts.push(("eta_sweep.svg".into(), sweep.render().into_bytes()));
    res.finish(clock, &mut out);
    Ok(out)
}

/// Writes every artifact into `dir`, each through a temporary file renamed
/// into place.
pub fn write_artifacts(dir: &Path, artifacts: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in artifacts {
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, dir.join(name))?;
    }
    Ok(())
}
