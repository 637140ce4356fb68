//! Run configuration: JSON file, command-line overrides, defaults.
//!
//! Precedence is flags > file > defaults. Defaults: M = 1, a = 0.6, tolerance 1e-8.

use kerrteuk::{KerrError, KerrParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every field optional; used both for the config file and for flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub mass: Option<f64>,
    pub a: Option<f64>,
    pub spins: Option<Vec<i32>>,
    pub omegas: Option<Vec<f64>>,
    pub m_max: Option<i32>,
    pub ell_max: Option<i32>,
    pub tolerance: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl PartialConfig {
    fn or(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            mass: self.mass.or(lower.mass),
            a: self.a.or(lower.a),
            spins: self.spins.or(lower.spins),
            omegas: self.omegas.or(lower.omegas),
            m_max: self.m_max.or(lower.m_max),
            ell_max: self.ell_max.or(lower.ell_max),
            tolerance: self.tolerance.or(lower.tolerance),
            output_dir: self.output_dir.or(lower.output_dir),
            format: self.format.or(lower.format),
            seed: self.seed.or(lower.seed),
        }
    }

    pub fn defaults() -> PartialConfig {
        PartialConfig {
            mass: Some(1.0),
            a: Some(0.6),
            spins: Some(vec![0, 1, 2]),
            omegas: Some(vec![0.1, 0.3, 0.5]),
            m_max: Some(2),
            ell_max: Some(6),
            tolerance: Some(1e-8),
            output_dir: Some(PathBuf::from("kerrteuk-out")),
            format: Some(Format::Json),
            seed: Some(20240611),
        }
    }
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: KerrParams,
    pub spins: Vec<i32>,
    pub omegas: Vec<f64>,
    pub m_max: i32,
    pub ell_max: i32,
    /// Tolerance of the identities whose nominal accuracy is 1e-8.
    pub tolerance: f64,
    pub output_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        validate(PartialConfig::defaults()).expect("defaults are valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: PathBuf, msg: String },
    /// Malformed document; `path` locates the offending field when known.
    Schema { path: String, msg: String },
    Field { field: &'static str, msg: String },
    Extremal(KerrError),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io { path, msg } => write!(f, "cannot read config {}: {msg}", path.display()),
            ConfigError::Schema { path, msg } if path.is_empty() || path == "." => write!(f, "config schema violation: {msg}"),
            ConfigError::Schema { path, msg } => write!(f, "config field `{path}`: {msg}"),
            ConfigError::Field { field, msg } => write!(f, "config field `{field}`: {msg}"),
            ConfigError::Extremal(e) => write!(f, "config field `a`: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Read `path` (if any), apply `flags` on top and fill the rest from defaults.
pub fn parse_config(path: Option<&Path>, flags: PartialConfig) -> Result<RunConfig, ConfigError> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io { path: p.to_path_buf(), msg: e.to_string() })?;
            parse_partial(&text)?
        }
        None => PartialConfig::default(),
    };
    validate(flags.or(file).or(PartialConfig::defaults()))
}

/// An empty or whitespace-only document is an empty config.
pub fn parse_partial(text: &str) -> Result<PartialConfig, ConfigError> {
    if text.trim().is_empty() {
        return Ok(PartialConfig::default());
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema { path: e.path().to_string(), msg: e.into_inner().to_string() })
}

fn field(field: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, msg: msg.into() }
}

fn validate(c: PartialConfig) -> Result<RunConfig, ConfigError> {
    let mass = c.mass.unwrap();
    let a = c.a.unwrap();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(field("mass", format!("must be positive and finite, got {mass}")));
    }
    if !a.is_finite() {
        return Err(field("a", format!("must be finite, got {a}")));
    }
    let params = KerrParams::new(mass, a).map_err(ConfigError::Extremal)?;
    let spins = c.spins.unwrap();
    if spins.is_empty() {
        return Err(field("spins", "must be nonempty"));
    }
    if let Some(s) = spins.iter().find(|s| s.abs() > 2) {
        return Err(field("spins", format!("spin {s} outside -2..=2")));
    }
    let omegas = c.omegas.unwrap();
    if omegas.is_empty() {
        return Err(field("omegas", "must be nonempty"));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(field("omegas", "must be finite"));
    }
    let m_max = c.m_max.unwrap();
    if !(0..=8).contains(&m_max) {
        return Err(field("m_max", format!("must lie in 0..=8, got {m_max}")));
    }
    let ell_max = c.ell_max.unwrap();
    let smax = spins.iter().map(|s| s.abs()).max().unwrap();
    if ell_max < smax || ell_max > 12 {
        return Err(field("ell_max", format!("must lie in {smax}..=12, got {ell_max}")));
    }
    let tolerance = c.tolerance.unwrap();
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(field("tolerance", format!("must be positive, got {tolerance}")));
    }
    Ok(RunConfig { params, spins, omegas, m_max, ell_max, tolerance, output_dir: c.output_dir.unwrap(), format: c.format.unwrap(), seed: c.seed.unwrap() })
}
