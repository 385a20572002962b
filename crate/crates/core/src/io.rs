//! File formats.
//!
//! Spectrum CSV: `#`-prefixed `key = value` header lines (format version,
//! tool version, JSON parameter echo, optional resolved run configuration),
//! then the columns `energy_keV,value,model_tag,atom,flags`. `flags` is a
//! `|`-separated subset of `negative`, `sub_kev`.
//!
//! Synthetic spectrum: a CSV with columns
//! `bin_center_keV,bin_width_keV,counts,efficiency,background_rate` and a JSON
//! sidecar (same stem, `.json`) holding exposure, seed and the truth record.
//!
//! Floats are written in shortest round-trip exponent form, so reading a file
//! back yields bit-identical values.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::inference::{Detector, SyntheticSpectrum, Truth};
use crate::spectra::{EnergyGrid, Spacing, Spectrum};
use crate::units::VALIDITY_FLOOR_KEV;

pub const FORMAT_VERSION: u32 = 1;

/// Provenance written into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub format_version: u32,
    pub tool_version: String,
    /// Fully resolved run configuration, when produced by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

impl Metadata {
    pub fn new(config: Option<Value>) -> Self {
        Metadata { format_version: FORMAT_VERSION, tool_version: crate::VERSION.to_string(), config }
    }
}

impl Default for Metadata {
    fn default() -> Self {
        Metadata::new(None)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// CSV writer with a `# key = value` preamble.
pub struct CommentedCsv<W: Write> {
    out: W,
}

impl<W: Write> CommentedCsv<W> {
    pub fn new(mut out: W, title: &str, meta: &Metadata, extra: &[(&str, String)]) -> Result<Self> {
        writeln!(out, "# {title}")?;
        writeln!(out, "# format_version = {}", meta.format_version)?;
        writeln!(out, "# tool_version = {}", meta.tool_version)?;
        for (k, v) in extra {
            writeln!(out, "# {k} = {v}")?;
        }
        if let Some(config) = &meta.config {
            writeln!(out, "# config = {}", serde_json::to_string(config)?)?;
        }
        Ok(CommentedCsv { out })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        let line: Vec<&str> = fields.iter().map(|s| s.as_ref()).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Reads the `# key = value` preamble of a commented CSV.
pub fn read_preamble<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.split_once('=') {
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}

fn preamble_value<'a>(preamble: &'a [(String, String)], key: &str) -> Option<&'a str> {
    preamble.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn point_flags(energy: f64, value: f64) -> String {
    let mut flags = Vec::new();
    if value < 0.0 {
        flags.push("negative");
    }
    if energy < VALIDITY_FLOOR_KEV {
        flags.push("sub_kev");
    }
    flags.join("|")
}

pub fn write_spectrum_csv<W: Write>(out: W, spectrum: &Spectrum, meta: &Metadata) -> Result<W> {
    let extra = [
        ("normalized", spectrum.normalized.to_string()),
        ("params_echo", serde_json::to_string(&spectrum.params_echo)?),
    ];
    let mut csv = CommentedCsv::new(out, "collapse-radiance spectrum", meta, &extra)?;
    csv.row(&["energy_keV", "value", "model_tag", "atom", "flags"])?;
    let tag = spectrum.model_tag();
    for (e, v) in spectrum.energies().iter().zip(&spectrum.values) {
        csv.row(&[fmt_f64(*e), fmt_f64(*v), tag.clone(), spectrum.atom_symbol.clone(), point_flags(*e, *v)])?;
    }
    csv.finish()
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectrumDocument {
    #[serde(flatten)]
    meta: Metadata,
    kind: String,
    model_tag: String,
    spectrum: Spectrum,
}

pub fn spectrum_to_json(spectrum: &Spectrum, meta: &Metadata) -> Result<String> {
    let doc = SpectrumDocument {
        meta: meta.clone(),
        kind: "spectrum".into(),
        model_tag: spectrum.model_tag(),
        spectrum: spectrum.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn spectrum_from_json(text: &str) -> Result<Spectrum> {
    let doc: SpectrumDocument = serde_json::from_str(text)?;
    check_version(doc.meta.format_version)?;
    let s = doc.spectrum;
    if s.values.len() != s.grid.len() {
        return Err(Error::Format("value count does not match the grid".into()));
    }
    EnergyGrid::with_spacing(s.grid.points().to_vec(), s.grid.spacing())?;
    Ok(s)
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {v}")));
    }
    Ok(())
}

/// `path` with its extension replaced by `.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSidecar {
    #[serde(flatten)]
    pub meta: Metadata,
    pub exposure_s: f64,
    pub seed: u64,
    #[serde(default = "explicit")]
    pub grid_spacing: Spacing,
    pub clamped_flag: bool,
    pub truth: Truth,
}

fn explicit() -> Spacing {
    Spacing::Explicit
}

pub fn write_synthetic_csv<W: Write>(out: W, data: &SyntheticSpectrum, meta: &Metadata) -> Result<W> {
    let extra = [("exposure_s", fmt_f64(data.detector.exposure)), ("seed", data.seed.to_string())];
    let mut csv = CommentedCsv::new(out, "collapse-radiance synthetic spectrum", meta, &extra)?;
    csv.row(&["bin_center_keV", "bin_width_keV", "counts", "efficiency", "background_rate"])?;
    let d = &data.detector;
    for i in 0..d.len() {
        csv.row(&[
            fmt_f64(d.centers.points()[i]),
            fmt_f64(d.widths[i]),
            data.counts[i].to_string(),
            fmt_f64(d.efficiency[i]),
            fmt_f64(d.background_rate[i]),
        ])?;
    }
    csv.finish()
}

pub fn synthetic_sidecar_json(data: &SyntheticSpectrum, meta: &Metadata) -> Result<String> {
    let sidecar = SyntheticSidecar {
        meta: meta.clone(),
        exposure_s: data.detector.exposure,
        seed: data.seed,
        grid_spacing: data.detector.centers.spacing(),
        clamped_flag: data.clamped_flag,
        truth: data.truth.clone(),
    };
    Ok(serde_json::to_string_pretty(&sidecar)?)
}

#[derive(Debug, Deserialize)]
struct SynthRow {
    bin_center_kev: f64,
    bin_width_kev: f64,
    counts: u64,
    efficiency: f64,
    background_rate: f64,
}

/// Rebuilds a synthetic spectrum from its CSV text and sidecar JSON text.
pub fn read_synthetic(csv_text: &str, sidecar_text: &str) -> Result<SyntheticSpectrum> {
    let sidecar: SyntheticSidecar = serde_json::from_str(sidecar_text)?;
    check_version(sidecar.meta.format_version)?;
    let mut reader =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = ["bin_center_keV", "bin_width_keV", "counts", "efficiency", "background_rate"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format(format!("unexpected synthetic spectrum columns {headers:?}")));
    }
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    let mut counts = Vec::new();
    let mut efficiency = Vec::new();
    let mut background = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: SynthRow = record.deserialize(None)?;
        centers.push(row.bin_center_kev);
        widths.push(row.bin_width_kev);
        counts.push(row.counts);
        efficiency.push(row.efficiency);
        background.push(row.background_rate);
    }
    let detector = Detector {
        centers: EnergyGrid::with_spacing(centers, sidecar.grid_spacing)?,
        widths,
        exposure: sidecar.exposure_s,
        efficiency,
        background_rate: background,
    };
    detector.validate()?;
    Ok(SyntheticSpectrum {
        detector,
        counts,
        seed: sidecar.seed,
        truth: sidecar.truth,
        clamped_flag: sidecar.clamped_flag,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SyntheticDocument {
    #[serde(flatten)]
    meta: Metadata,
    kind: String,
    synthetic: SyntheticSpectrum,
}

/// Single-document alternative to the CSV plus sidecar pair.
pub fn synthetic_to_json(data: &SyntheticSpectrum, meta: &Metadata) -> Result<String> {
    let doc = SyntheticDocument { meta: meta.clone(), kind: "synthetic".into(), synthetic: data.clone() };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn synthetic_from_json(text: &str) -> Result<SyntheticSpectrum> {
    let doc: SyntheticDocument = serde_json::from_str(text)?;
    check_version(doc.meta.format_version)?;
    let data = doc.synthetic;
    data.detector.validate()?;
    if data.counts.len() != data.detector.len() {
        return Err(Error::Format("count list length does not match the bins".into()));
    }
    Ok(data)
}

/// Resolved configuration recorded in a CSV preamble or a JSON output.
pub fn embedded_config(text: &str) -> Result<Option<Value>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed)?;
        return Ok(v.get("config").cloned());
    }
    let preamble = read_preamble(text.as_bytes())?;
    preamble_value(&preamble, "config").map(|c| serde_json::from_str(c).map_err(Error::from)).transpose()
}
