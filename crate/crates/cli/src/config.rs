//! Experiment configuration from a flat TOML file.
//!
//! Every setting is a dotted key path such as `model.preset` or
//! `trials.gv`. Tables are flattened before lookup, so `[model]` sections and
//! dotted keys are interchangeable. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use etacalc_core::dirac::{DiracModel, ModelSpec, Preset, ProjectionKind, TGrid};
use etacalc_core::suites;
use toml::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Trial counts per identity family.
#[derive(Clone, Debug, PartialEq)]
pub struct Trials {
    pub melrose: usize,
    pub lambda: usize,
    pub symbol: usize,
    pub hilbert: usize,
    pub section: usize,
    pub gv: usize,
    pub alexander_spanier: usize,
    pub eta: usize,
}

impl Default for Trials {
    fn default() -> Self {
        Trials {
            melrose: suites::TRIALS_MELROSE,
            lambda: suites::TRIALS_LAMBDA,
            symbol: suites::TRIALS_SYMBOL,
            hilbert: suites::TRIALS_HILBERT,
            section: suites::TRIALS_SECTION,
            gv: suites::TRIALS_GV,
            alexander_spanier: suites::TRIALS_AS,
            eta: suites::TRIALS_ETA,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub trials: Trials,
    /// Degree of the Alexander-Spanier cochain.
    pub as_degree: usize,
    /// Presets for `aps` and `eta`; `model.preset` selects a single one.
    pub presets: Vec<Preset>,
    /// Overrides applied on top of each preset.
    pub model: BTreeMap<String, Value>,
    pub kinds: Vec<ProjectionKind>,
    pub sweep: Vec<f64>,
    /// Boundary operators `A = a` whose eta invariants the `eta` suite tabulates.
    pub eta_values: Vec<f64>,
    pub gv_transgression: bool,
    pub gv_tgrid: TGrid,
    /// Per-identity tolerance overrides.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            workers: None,
            out: None,
            trials: Trials::default(),
            as_degree: 2,
            presets: vec![Preset::Constant, Preset::TanhCrossing, Preset::CircleDiracWithTwist],
            model: BTreeMap::new(),
            kinds: vec![ProjectionKind::Graph],
            sweep: suites_sweep(),
            eta_values: vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
            gv_transgression: true,
            gv_tgrid: TGrid { t_min: 0.05, t_max: 0.2, points: 3 },
            tolerances: BTreeMap::new(),
        }
    }
}

fn suites_sweep() -> Vec<f64> {
    etacalc_core::index::pairing::SWEEP.to_vec()
}

/// Identities whose tolerance may be overridden.
pub const IDENTITIES: [&str; 24] = [
    "melrose-commutator",
    "roe-lambda-window",
    "roe-lambda-suspension",
    "roe-eq-melrose-symbol",
    "roe-eq-melrose-coefficients",
    "shift-anchor-roe",
    "shift-anchor-melrose",
    "hilbert-cotangent",
    "hilbert-multiplier",
    "trace-section",
    "weight-section",
    "gv-tau-cocycle",
    "gv-sigma-cocycle",
    "gv-relative",
    "gv-sigma-lambda",
    "gv-eta-lambda",
    "as-tau-cocycle",
    "as-sigma-cocycle",
    "as-relative",
    "eta-odd",
    "eta-tail",
    "rescaling-sweep",
    "excision",
    "oracle",
];

const MODEL_KEYS: [&str; 13] = [
    "n_circle", "a_minus", "a_plus", "kappa", "h", "interior", "window", "eps", "scale", "kind", "tgrid.t_min", "tgrid.t_max",
    "tgrid.points",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            _ => {
                out.insert(key, v.clone());
            }
        }
    }
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), msg: msg.into() }
}

fn as_count(key: &str, v: &Value) -> Result<usize> {
    match v.as_integer() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(invalid(key, "expected a positive integer")),
    }
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(invalid(key, "expected a finite number")),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| invalid(key, "expected a string"))
}

fn as_floats(key: &str, v: &Value) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| invalid(key, "expected an array of numbers"))?;
    if arr.is_empty() {
        return Err(invalid(key, "must not be empty"));
    }
    arr.iter().map(|x| as_float(key, x)).collect()
}

fn as_strs<'a>(key: &str, v: &'a Value) -> Result<Vec<&'a str>> {
    let arr = v.as_array().ok_or_else(|| invalid(key, "expected an array of strings"))?;
    if arr.is_empty() {
        return Err(invalid(key, "must not be empty"));
    }
    arr.iter().map(|x| as_str(key, x)).collect()
}

pub fn parse_kind(key: &str, s: &str) -> Result<ProjectionKind> {
    match s {
        "graph" => Ok(ProjectionKind::Graph),
        "wassermann" => Ok(ProjectionKind::Wassermann),
        _ => Err(invalid(key, format!("unknown projection kind {s:?}"))),
    }
}

pub fn parse_preset(key: &str, s: &str) -> Result<Preset> {
    s.parse().map_err(|_| invalid(key, format!("unknown preset {s:?}")))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);
        let mut cfg = ExperimentConfig::default();
        for (key, v) in &flat {
            let k = key.as_str();
            match k {
                "seed" => match v.as_integer() {
                    Some(n) if n >= 0 => cfg.seed = n as u64,
                    _ => return Err(invalid(k, "expected a non-negative integer")),
                },
                "workers" => cfg.workers = Some(as_count(k, v)?),
                "out" => cfg.out = Some(PathBuf::from(as_str(k, v)?)),
                "trials.melrose" => cfg.trials.melrose = as_count(k, v)?,
                "trials.lambda" => cfg.trials.lambda = as_count(k, v)?,
                "trials.symbol" => cfg.trials.symbol = as_count(k, v)?,
                "trials.hilbert" => cfg.trials.hilbert = as_count(k, v)?,
                "trials.section" => cfg.trials.section = as_count(k, v)?,
                "trials.gv" => cfg.trials.gv = as_count(k, v)?,
                "trials.as" => cfg.trials.alexander_spanier = as_count(k, v)?,
                "trials.eta" => cfg.trials.eta = as_count(k, v)?,
                "as.degree" => {
                    let p = v.as_integer().filter(|p| *p >= 0 && p % 2 == 0).ok_or_else(|| invalid(k, "expected an even non-negative integer"))?;
                    cfg.as_degree = p as usize;
                }
                "model.preset" => cfg.presets = vec![parse_preset(k, as_str(k, v)?)?],
                "presets" => {
                    cfg.presets = as_strs(k, v)?.into_iter().map(|s| parse_preset(k, s)).collect::<Result<_>>()?;
                }
                "kinds" => cfg.kinds = as_strs(k, v)?.into_iter().map(|s| parse_kind(k, s)).collect::<Result<_>>()?,
                "eta.sweep" => {
                    cfg.sweep = as_floats(k, v)?;
                    if cfg.sweep.iter().any(|s| *s <= 0.0) {
                        return Err(invalid(k, "scales must be positive"));
                    }
                }
                "eta.values" => {
                    cfg.eta_values = as_floats(k, v)?;
                    if cfg.eta_values.iter().any(|a| *a == 0.0) {
                        return Err(invalid(k, "a gapless boundary operator has no eta invariant"));
                    }
                }
                "gv.transgression" => cfg.gv_transgression = v.as_bool().ok_or_else(|| invalid(k, "expected a boolean"))?,
                "gv.tgrid.t_min" => cfg.gv_tgrid.t_min = as_float(k, v)?,
                "gv.tgrid.t_max" => cfg.gv_tgrid.t_max = as_float(k, v)?,
                "gv.tgrid.points" => cfg.gv_tgrid.points = as_count(k, v)?,
                _ if k.starts_with("model.") && MODEL_KEYS.contains(&&k["model.".len()..]) => {
                    cfg.model.insert(k["model.".len()..].to_string(), v.clone());
                }
                _ if k.starts_with("tolerances.") => {
                    let name = &k["tolerances.".len()..];
                    if !IDENTITIES.contains(&name) {
                        return Err(ConfigError::UnknownKey(k.to_string()));
                    }
                    let t = as_float(k, v)?;
                    if !(t > 0.0) {
                        return Err(invalid(k, "tolerances must be positive"));
                    }
                    cfg.tolerances.insert(name.to_string(), t);
                }
                _ => return Err(ConfigError::UnknownKey(k.to_string())),
            }
        }
        cfg.gv_tgrid.validate().map_err(|e| invalid("gv.tgrid", e.to_string()))?;
        for &p in &cfg.presets {
            cfg.model_for(p)?;
        }
        Ok(cfg)
    }

    /// Preset `p` with the `model.*` overrides, validated and built.
    pub fn model_for(&self, p: Preset) -> Result<(ModelSpec, DiracModel)> {
        let mut spec = ModelSpec::preset(p);
        for (k, v) in &self.model {
            let key = format!("model.{k}");
            match k.as_str() {
                "n_circle" => spec.n_circle = as_count(&key, v)?,
                "a_minus" => spec.a_minus = as_float(&key, v)?,
                "a_plus" => spec.a_plus = as_float(&key, v)?,
                "kappa" => spec.kappa = as_float(&key, v)?,
                "h" => spec.h = as_float(&key, v)?,
                "interior" => spec.interior = as_count(&key, v)?,
                "window" => spec.window = as_count(&key, v)?,
                "eps" => spec.eps = as_float(&key, v)?,
                "scale" => spec.scale = as_float(&key, v)?,
                "kind" => spec.kind = parse_kind(&key, as_str(&key, v)?)?,
                "tgrid.t_min" => spec.tgrid.t_min = as_float(&key, v)?,
                "tgrid.t_max" => spec.tgrid.t_max = as_float(&key, v)?,
                "tgrid.points" => spec.tgrid.points = as_count(&key, v)?,
                _ => return Err(ConfigError::UnknownKey(key)),
            }
        }
        let model = DiracModel::from_spec(&spec).map_err(|e| invalid(&format!("model ({})", p.name()), e.to_string()))?;
        Ok((spec, model))
    }

    /// Tolerance for `identity`: the override if any, else `default`.
    pub fn tolerance(&self, identity: &str, default: f64) -> f64 {
        self.tolerances.get(identity).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = ExperimentConfig::from_toml("model.window = 30\ntrials.gv = 3\n").unwrap();
        let b = ExperimentConfig::from_toml("[model]\nwindow = 30\n[trials]\ngv = 3\n").unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.model_for(Preset::TanhCrossing).unwrap().0.window, 30);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "seed = ",
            "bogus = 1",
            "trials.gv = 0",
            "model.preset = \"sphere\"",
            "presets = [\"nope\"]",
            "tolerances.melrose-commutator = -1.0",
            "tolerances.unknown = 1.0",
            "as.degree = 3",
            "model.eps = 5.0",
            "gv.tgrid.t_min = 1.0\ngv.tgrid.t_max = 0.5",
            "eta.values = [0.0]",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn tolerance_overrides() {
        let c = ExperimentConfig::from_toml("tolerances.hilbert-cotangent = 1e-3\n").unwrap();
        assert_eq!(c.tolerance("hilbert-cotangent", 1e-10), 1e-3);
        assert_eq!(c.tolerance("hilbert-multiplier", 1e-10), 1e-10);
    }
}
