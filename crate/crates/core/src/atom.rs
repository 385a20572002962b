//! Atoms as proton count plus electron shells, and the pair geometry the rate
//! sums run over.
//!
//! Protons are point-like at the origin. An electron in shell `o` sits at the
//! shell's mean radius `ρ_o` from every proton. Two electrons of the same shell
//! are `α·ρ_o` apart, two electrons of different shells `β·|ρ_o − ρ_o'|`.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{AtomError, Error, Result};

/// Environment variable overriding the directory holding builtin atom files.
pub const DATA_DIR_ENV: &str = "COLLAPSE_RADIANCE_DATA";

const BUILTIN_GE: &str = include_str!("../data/atoms/ge.json");
const BUILTIN_XE: &str = include_str!("../data/atoms/xe.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub label: String,
    pub occupancy: u32,
    /// Mean orbital radius ρ_o (m).
    #[serde(rename = "mean_radius_m")]
    pub mean_radius: f64,
    /// Same-shell distance coefficient replacing the global α for this shell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_override: Option<f64>,
}

impl Shell {
    pub fn new(label: impl Into<String>, occupancy: u32, mean_radius: f64) -> Self {
        Shell { label: label.into(), occupancy, mean_radius, alpha_override: None }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha_override = Some(alpha);
        self
    }

    /// Capacity 2(2ℓ+1) when the label names a standard subshell like `3d`.
    pub fn capacity(&self) -> Option<u32> {
        let label = self.label.trim();
        let letter = label.chars().last()?;
        let n: u32 = label[..label.len() - letter.len_utf8()].parse().ok()?;
        let l = match letter {
            's' => 0,
            'p' => 1,
            'd' => 2,
            'f' => 3,
            'g' => 4,
            _ => return None,
        };
        (n > l).then_some(2 * (2 * l + 1))
    }

    fn validate(&self) -> std::result::Result<(), AtomError> {
        if self.occupancy == 0 {
            return Err(AtomError::EmptyShell { label: self.label.clone() });
        }
        if let Some(capacity) = self.capacity() {
            if self.occupancy > capacity {
                return Err(AtomError::OverfilledShell {
                    label: self.label.clone(),
                    occupancy: self.occupancy,
                    capacity,
                });
            }
        }
        if !(self.mean_radius.is_finite() && self.mean_radius > 0.0) {
            return Err(AtomError::InvalidRadius { label: self.label.clone(), value: self.mean_radius });
        }
        if let Some(alpha) = self.alpha_override {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(AtomError::InvalidAlphaOverride { label: self.label.clone(), value: alpha });
            }
        }
        Ok(())
    }
}

/// A validated atom. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    symbol: String,
    n_protons: u32,
    neutral: bool,
    radii_provenance: String,
    shells: Vec<Shell>,
}

impl Atom {
    /// Builds a neutral atom; the shell occupancies must sum to `n_protons`.
    pub fn neutral(
        symbol: impl Into<String>,
        n_protons: u32,
        shells: Vec<Shell>,
        radii_provenance: impl Into<String>,
    ) -> std::result::Result<Self, AtomError> {
        Self::build(symbol.into(), n_protons, true, shells, radii_provenance.into())
    }

    /// Builds an ion. The electron count is whatever the shells hold.
    pub fn ion(
        symbol: impl Into<String>,
        n_protons: u32,
        shells: Vec<Shell>,
        radii_provenance: impl Into<String>,
    ) -> std::result::Result<Self, AtomError> {
        Self::build(symbol.into(), n_protons, false, shells, radii_provenance.into())
    }

    fn build(
        symbol: String,
        n_protons: u32,
        neutral: bool,
        shells: Vec<Shell>,
        radii_provenance: String,
    ) -> std::result::Result<Self, AtomError> {
        if n_protons == 0 {
            return Err(AtomError::NoProtons);
        }
        if shells.is_empty() {
            return Err(AtomError::NoShells);
        }
        let mut seen = HashSet::new();
        for shell in &shells {
            shell.validate()?;
            if !seen.insert(shell.label.as_str()) {
                return Err(AtomError::DuplicateShell(shell.label.clone()));
            }
        }
        let electrons: u32 = shells.iter().map(|s| s.occupancy).sum();
        if neutral && electrons != n_protons {
            return Err(AtomError::OccupancyMismatch { symbol, protons: n_protons, electrons });
        }
        Ok(Atom { symbol, n_protons, neutral, radii_provenance, shells })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn n_protons(&self) -> u32 {
        self.n_protons
    }

    pub fn n_electrons(&self) -> u32 {
        self.shells.iter().map(|s| s.occupancy).sum()
    }

    pub fn is_neutral(&self) -> bool {
        self.n_protons == self.n_electrons()
    }

    pub fn radii_provenance(&self) -> &str {
        &self.radii_provenance
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn min_radius(&self) -> f64 {
        self.shells.iter().map(|s| s.mean_radius).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.shells.iter().map(|s| s.mean_radius).fold(0.0, f64::max)
    }

    pub fn to_document(&self) -> AtomDocument {
        AtomDocument {
            symbol: self.symbol.clone(),
            z: self.n_protons,
            neutral: self.neutral,
            radii_provenance: self.radii_provenance.clone(),
            shells: self.shells.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("atom documents serialize")
    }
}

/// On-disk atom schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub symbol: String,
    #[serde(rename = "Z")]
    pub z: u32,
    #[serde(default = "default_neutral")]
    pub neutral: bool,
    #[serde(default)]
    pub radii_provenance: String,
    pub shells: Vec<Shell>,
}

fn default_neutral() -> bool {
    true
}

impl TryFrom<AtomDocument> for Atom {
    type Error = AtomError;

    fn try_from(doc: AtomDocument) -> std::result::Result<Self, AtomError> {
        Atom::build(doc.symbol, doc.z, doc.neutral, doc.shells, doc.radii_provenance)
    }
}

/// Parses and validates a JSON atom document.
pub fn parse_atom(document: &str) -> std::result::Result<Atom, AtomError> {
    let doc: AtomDocument = serde_json::from_str(document).map_err(|e| AtomError::Malformed(e.to_string()))?;
    Atom::try_from(doc)
}

/// Loads a shipped atom (`Ge`, `Xe`). When `COLLAPSE_RADIANCE_DATA` is set,
/// `<dir>/<symbol lowercase>.json` is read instead of the embedded copy, which
/// also makes additional symbols available.
pub fn builtin_atom(symbol: &str) -> Result<Atom> {
    let key = symbol.trim().to_ascii_lowercase();
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{key}.json"));
        return match std::fs::read_to_string(&path) {
            Ok(text) => Ok(parse_atom(&text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(AtomError::UnknownSymbol(symbol.to_string()).into())
            }
            Err(e) => Err(Error::Io(e)),
        };
    }
    let text = match key.as_str() {
        "ge" => BUILTIN_GE,
        "xe" => BUILTIN_XE,
        _ => return Err(AtomError::UnknownSymbol(symbol.to_string()).into()),
    };
    Ok(parse_atom(text)?)
}

/// Inter-electron distance coefficients: α for two electrons of one shell,
/// β for electrons of different shells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub alpha: f64,
    pub beta: f64,
}

impl PairGeometry {
    pub const DEFAULT_ALPHA: f64 = 1.25;
    pub const DEFAULT_BETA: f64 = 1.04;
    /// α band spanned by intracule estimates for He, Li and Be.
    pub const ALPHA_BAND: (f64, f64) = (1.0, 1.5);

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        crate::error::ensure_positive("alpha", alpha)?;
        crate::error::ensure_positive("beta", beta)?;
        Ok(PairGeometry { alpha, beta })
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        PairGeometry::new(alpha, self.beta)
    }
}

impl Default for PairGeometry {
    fn default() -> Self {
        PairGeometry { alpha: Self::DEFAULT_ALPHA, beta: Self::DEFAULT_BETA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    ProtonProton,
    ProtonElectron,
    ElectronSameShell,
    ElectronCrossShell,
    ElectronSelf,
}

impl PairKind {
    /// Product of the two charges in units of e².
    pub fn charge_sign(self) -> f64 {
        match self {
            PairKind::ProtonElectron => -1.0,
            _ => 1.0,
        }
    }
}

/// One group of ordered particle pairs sharing a kind and a distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub kind: PairKind,
    /// Separation (m).
    pub distance: f64,
    /// Number of ordered pairs (i, j) in the group.
    pub multiplicity: u64,
}

/// Groups all ordered charged-particle pairs of `atom` by separation.
///
/// Order: proton–proton, electron self-pairs, then per shell the
/// proton–electron and same-shell terms, then cross-shell terms for
/// `o < o'` in shell-list order.
pub fn enumerate_pairs(atom: &Atom, geom: &PairGeometry) -> Vec<PairTerm> {
    let n_p = u64::from(atom.n_protons());
    let n_e = u64::from(atom.n_electrons());
    let shells = atom.shells();
    let mut terms = Vec::with_capacity(2 + 2 * shells.len() + shells.len() * shells.len() / 2);
    terms.push(PairTerm { kind: PairKind::ProtonProton, distance: 0.0, multiplicity: n_p * n_p });
    terms.push(PairTerm { kind: PairKind::ElectronSelf, distance: 0.0, multiplicity: n_e });
    for shell in shells {
        let n_o = u64::from(shell.occupancy);
        terms.push(PairTerm {
            kind: PairKind::ProtonElectron,
            distance: shell.mean_radius,
            multiplicity: 2 * n_p * n_o,
        });
        if n_o >= 2 {
            let alpha = shell.alpha_override.unwrap_or(geom.alpha);
            terms.push(PairTerm {
                kind: PairKind::ElectronSameShell,
                distance: alpha * shell.mean_radius,
                multiplicity: n_o * (n_o - 1),
            });
        }
    }
    for (i, a) in shells.iter().enumerate() {
        for b in &shells[i + 1..] {
            terms.push(PairTerm {
                kind: PairKind::ElectronCrossShell,
                distance: geom.beta * (a.mean_radius - b.mean_radius).abs(),
                multiplicity: 2 * u64::from(a.occupancy) * u64::from(b.occupancy),
            });
        }
    }
    terms
}
