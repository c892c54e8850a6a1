//! `etacalc`: runs identity, eta, pairing and cocycle suites and writes
//! CSV, JSON and SVG artifacts.

mod config;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_preset, ConfigError, ExperimentConfig};
use run::Suite;

/// Default output directory when neither `--out` nor the config sets one.
const OUT_ENV: &str = "ETACALC_OUT";
const DEFAULT_OUT: &str = "etacalc-out";

#[derive(Parser, Debug)]
#[command(name = "etacalc", version, about = "Residual suites for cylinder cocycles and eta invariants")]
struct Cli {
    suite: Suite,
    /// Flat-key TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict to one model preset.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory. Falls back to the config, then to $ETACALC_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel maps.
    #[arg(long)]
    workers: Option<usize>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &cli.preset {
        let p = parse_preset("--preset", p)?;
        cfg.model_for(p)?;
        cfg.presets = vec![p];
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("etacalc: {e}");
            return ExitCode::from(2);
        }
    };
    let out_dir = cfg
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if let Some(n) = cfg.workers {
        etacalc_core::par::init_workers(n);
    }

    let output = match run::run(cli.suite, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("etacalc {}: {e}", cli.suite.name());
            return ExitCode::from(1);
        }
    };
    if let Err(e) = run::write_artifacts(&out_dir, &output.artifacts) {
        eprintln!("etacalc: cannot write {}: {e}", out_dir.display());
        return ExitCode::from(1);
    }
    for line in &output.failures {
        eprintln!("FAIL {line}");
    }
    let names: Vec<&str> = output.artifacts.iter().map(|(n, _)| n.as_str()).collect();
    println!("{} {}: wrote {} to {}", cli.suite.name(), if output.passed { "passed" } else { "FAILED" }, names.join(", "), out_dir.display());
    if output.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
