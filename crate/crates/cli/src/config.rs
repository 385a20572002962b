//! Run configuration: command-line flags layered over an optional config
//! file, completed with per-command defaults. The resolved record is what
//! every output echoes, and it can be fed back through `--config`.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Every tunable value. Flags and config-file keys share these names
/// (`--rel-tol` on the command line, `rel_tol` in a file).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Command the record was resolved for (echo only).
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    /// Builtin atom symbol (Ge, Xe) or path to an atom JSON file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
    /// Rate model: csl-general, csl-simple, csl-longwave, dp-general, dp-simple.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// CSL correlation length r_C (m).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rc: Option<f64>,
    /// DP correlation length R_0 (m).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// CSL collapse strength λ (1/s) [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Colored-noise cutoff E_c (keV); omit for Markovian noise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ecut: Option<f64>,
    /// Same-shell distance coefficient α [default: 1.25].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Cross-shell distance coefficient β [default: 1.04].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Lowest grid energy (keV).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emin: Option<f64>,
    /// Highest grid energy (keV).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<GridSpacing>,

    /// Output format [default: csv, json for fit].
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Seed of the Poisson sampler [default: 42].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// compare: reference model [default: simple counterpart of --model].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// compare: convergence tolerance [default: 0.05]; fit: stopping tolerance [default: 1e-3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,

    /// band: lowest α [default: 1.0].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_min: Option<f64>,
    /// band: highest α [default: 1.5].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
    /// band: number of α samples [default: 11].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// zsurvey: comma-separated atoms (symbols or paths) [default: Ge,Xe].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    /// zsurvey: photon energy (keV).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,

    /// synth: exposure (s).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure: Option<f64>,
    /// synth: bin width (keV) [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    /// synth: detection efficiency in [0, 1] [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    /// synth: background rate, counts/(s·keV) [default: 0].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<f64>,

    /// fit: synthetic spectrum file (CSV with JSON sidecar, or JSON).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// fit: prior correlation length (m) [default: --rc or --r0].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
    /// fit: iteration cap [default: 50].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

const MODEL_KEYS: [&str; 9] = ["atom", "model", "rc", "r0", "lambda", "ecut", "alpha", "beta", "format"];
const GRID_KEYS: [&str; 4] = ["emin", "emax", "points", "spacing"];

/// Keys each command understands.
pub fn allowed_keys(command: &str) -> Vec<&'static str> {
    let (grid, extra): (bool, &[&str]) = match command {
        "spectrum" => (true, &[]),
        "compare" => (true, &["reference", "rel_tol"]),
        "band" => (true, &["alpha_min", "alpha_max", "samples"]),
        "zsurvey" => (false, &["atoms", "energy"]),
        "synth" => (true, &["seed", "exposure", "bin_width", "efficiency", "background"]),
        "fit" => (false, &["data", "prior", "rel_tol", "max_iter"]),
        _ => (false, &[]),
    };
    let mut keys = MODEL_KEYS.to_vec();
    let unused: &[&str] = match command {
        "band" => &["alpha"],
        "zsurvey" => &["atom"],
        "fit" => &["lambda"],
        _ => &[],
    };
    keys.retain(|k| !unused.contains(k));
    if grid {
        keys.extend(GRID_KEYS);
    }
    keys.extend(extra);
    keys
}

fn to_map(s: &Settings) -> Map<String, Value> {
    match serde_json::to_value(s).expect("settings serialize") {
        Value::Object(m) => m,
        _ => unreachable!("settings serialize to an object"),
    }
}

/// Loads a config: a TOML file, or any output of this tool (CSV preamble or
/// JSON document) that carries an echoed configuration.
pub fn load_config(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with("# collapse-radiance") || trimmed.starts_with('{') {
        let value = collapse_radiance::io::embedded_config(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            .ok_or_else(|| CliError::Usage(format!("{} carries no echoed configuration", path.display())))?;
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Flags over config. Flags that the command does not understand are usage
/// errors; config keys it does not understand are dropped, so a config
/// echoed by one command can seed another.
pub fn merge(command: &str, flags: &Settings, config: Option<Settings>) -> Result<Settings, CliError> {
    let allowed = allowed_keys(command);
    let flag_map = to_map(flags);
    if let Some(bad) = flag_map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("--{} does not apply to `{command}`", bad.replace('_', "-"))));
    }
    let mut merged = config.as_ref().map(to_map).unwrap_or_default();
    merged.retain(|k, _| allowed.contains(&k.as_str()));
    merged.extend(flag_map);
    merged.insert("command".into(), Value::String(command.into()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(e.to_string()))
}

impl Settings {
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("settings serialize")
    }
}
