use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "seed = 11
[trials]
melrose = 4
lambda = 2
symbol = 2
hilbert = 2
section = 2
gv = 1
as = 1
eta = 1
";

fn etacalc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etacalc"))
        .current_dir(dir)
        .env_remove("ETACALC_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn workspace(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "identity");
    r.records().map(|row| row.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn identities_suite_passes_and_writes_reports() {
    let dir = workspace(SMALL);
    let out = etacalc(dir.path(), &["identities", "--config", "run.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/identities_residuals.csv"));
    assert!(rows.iter().all(|r| r[5] == "true" && !r[0].is_empty()));
    for name in ["melrose-commutator", "roe-eq-melrose-symbol", "hilbert-cotangent", "gv-relative", "as-relative"] {
        assert!(rows.iter().any(|r| r[0] == name), "{name} missing");
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("o/identities_residuals.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["records"].as_array().unwrap().len(), rows.len());
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let dir = workspace(SMALL);
    for o in ["a", "b"] {
        let out = etacalc(dir.path(), &["identities", "--config", "run.toml", "--out", o]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a/identities_residuals.csv")).unwrap();
    let b = fs::read(dir.path().join("b/identities_residuals.csv")).unwrap();
    assert_eq!(a, b);
    let out = etacalc(dir.path(), &["identities", "--config", "run.toml", "--seed", "12", "--out", "c"]);
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(a, fs::read(dir.path().join("c/identities_residuals.csv")).unwrap());
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    for bad in ["seed = ", "seed = -3", "no_such_key = 1", "[model]\nh = \"wide\"", "tolerances.unknown = 1e-3"] {
        let dir = workspace(bad);
        let out = etacalc(dir.path(), &["identities", "--config", "run.toml", "--out", "o"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!dir.path().join("o").exists(), "{bad}");
    }
    let dir = workspace(SMALL);
    let out = etacalc(dir.path(), &["aps", "--preset", "nonesuch", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_config_file_exits_2() {
    let dir = workspace(SMALL);
    let out = etacalc(dir.path(), &["identities", "--config", "absent.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn tolerance_failure_exits_1_and_names_the_identity() {
    let dir = workspace(&format!("{SMALL}[tolerances]\nmelrose-commutator = 1e-30\n"));
    let out = etacalc(dir.path(), &["identities", "--config", "run.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("melrose-commutator"));
    let rows = csv_rows(&dir.path().join("o/identities_residuals.csv"));
    assert!(rows.iter().any(|r| r[0] == "melrose-commutator" && r[5] == "false"));
}

#[test]
fn aps_tanh_crossing_pairs_to_one() {
    let dir = workspace(SMALL);
    let out = etacalc(dir.path(), &["aps", "--preset", "tanh-crossing", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/aps_summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "excision");
    let absolute: f64 = rows[0][4].parse().unwrap();
    let relative: f64 = rows[0][8].parse().unwrap();
    assert!((absolute - 1.0).abs() < 1e-6 && (relative - 1.0).abs() < 1e-6);
    assert_eq!(rows[0][10], "1");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("o/aps_report.json")).unwrap()).unwrap();
    assert!(json[0]["runtimes"]["relative_s"].is_number());
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = workspace(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_etacalc"))
        .current_dir(dir.path())
        .env("ETACALC_OUT", "from-env")
        .args(["as", "--config", "run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("from-env/as_residuals.csv").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_etacalc"))
        .current_dir(dir.path())
        .env("ETACALC_OUT", "from-env")
        .args(["as", "--config", "run.toml", "--out", "flag"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("flag/as_residuals.csv").exists());
}

#[test]
fn gv_suite_writes_transgression_samples_and_plot() {
    let dir = workspace(&format!("{SMALL}[gv.tgrid]\npoints = 2\n"));
    let out = etacalc(dir.path(), &["gv", "--config", "run.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/gv_transgression.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[0] == "gv-eta-integrand"));
    let svg = fs::read_to_string(dir.path().join("o/gv_transgression.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let rows = csv_rows(&dir.path().join("o/gv_residuals.csv"));
    assert!(rows.iter().any(|r| r[0] == "gv-eta-lambda"));
}

#[test]
fn eta_suite_tabulates_invariants_and_sweep() {
    let dir = workspace(&format!("presets = [\"tanh-crossing\"]\n{SMALL}[eta]\nvalues = [-1.0, 1.0]\nsweep = [0.5, 1.0]\n"));
    let out = etacalc(dir.path(), &["eta", "--config", "run.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/eta_invariants.csv"));
    let cont: Vec<_> = rows.iter().filter(|r| r[2] == "continuum").collect();
    assert_eq!(cont.len(), 2);
    for r in cont {
        let a: f64 = r[1].parse().unwrap();
        let eta: f64 = r[4].parse().unwrap();
        assert!((eta + 0.5 * a.signum()).abs() < 1e-8);
    }
    assert_eq!(csv_rows(&dir.path().join("o/eta_sweep.csv")).len(), 2);
    for f in ["eta_integrand.svg", "eta_sweep.svg", "eta_invariants.json", "eta_residuals.csv"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
}
