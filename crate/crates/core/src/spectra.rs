//! Energy grids, spectrum evaluation and the shape diagnostics built on it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atom::{Atom, AtomDocument, PairGeometry};
use crate::csl::{self, CslParams};
use crate::dp::{self, DpParams};
use crate::error::{ensure_positive, Error, Result};
use crate::units::{Energy, VALIDITY_FLOOR_KEV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
    /// Arbitrary user-supplied points.
    Explicit,
}

/// Strictly increasing, strictly positive photon energies (keV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl EnergyGrid {
    pub const DEFAULT_MIN_KEV: f64 = 1.0;
    pub const DEFAULT_MAX_KEV: f64 = 1000.0;
    pub const DEFAULT_POINTS: usize = 512;

    pub fn linear(emin: f64, emax: f64, n: usize) -> Result<Self> {
        Self::check_range(emin, emax, n)?;
        let step = (emax - emin) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| emin + step * i as f64).collect();
        points[n - 1] = emax;
        Self::build(points, Spacing::Linear)
    }

    pub fn log(emin: f64, emax: f64, n: usize) -> Result<Self> {
        Self::check_range(emin, emax, n)?;
        let (a, b) = (emin.ln(), emax.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
        points[0] = emin;
        points[n - 1] = emax;
        Self::build(points, Spacing::Log)
    }

    /// Any strictly increasing list of positive energies; a single point is
    /// allowed here.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        Self::build(points, Spacing::Explicit)
    }

    /// Validated points carrying a spacing label read back from a file.
    pub(crate) fn with_spacing(points: Vec<f64>, spacing: Spacing) -> Result<Self> {
        Self::build(points, spacing)
    }

    fn check_range(emin: f64, emax: f64, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        if !(emin.is_finite() && emax.is_finite() && emin > 0.0 && emax > emin) {
            return Err(Error::InvalidGrid(format!("need 0 < emin < emax, got [{emin}, {emax}]")));
        }
        Ok(())
    }

    fn build(points: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("no points".into()));
        }
        if let Some(bad) = points.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::InvalidGrid(format!("energy {bad} is not positive")));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("energies must be strictly increasing".into()));
        }
        Ok(EnergyGrid { points, spacing })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn energies(&self) -> impl Iterator<Item = Energy> + '_ {
        self.points.iter().map(|&e| Energy::from_kev(e).expect("grid points are validated"))
    }
}

impl Default for EnergyGrid {
    fn default() -> Self {
        EnergyGrid::log(Self::DEFAULT_MIN_KEV, Self::DEFAULT_MAX_KEV, Self::DEFAULT_POINTS)
            .expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Csl,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    CslGeneral,
    CslSimple,
    CslLongwave,
    DpGeneral,
    DpSimple,
}

impl RateModel {
    pub const ALL: [RateModel; 5] = [
        RateModel::CslGeneral,
        RateModel::CslSimple,
        RateModel::CslLongwave,
        RateModel::DpGeneral,
        RateModel::DpSimple,
    ];

    pub fn family(self) -> Family {
        match self {
            RateModel::CslGeneral | RateModel::CslSimple | RateModel::CslLongwave => Family::Csl,
            RateModel::DpGeneral | RateModel::DpSimple => Family::Dp,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateModel::CslGeneral => "csl_general",
            RateModel::CslSimple => "csl_simple",
            RateModel::CslLongwave => "csl_longwave",
            RateModel::DpGeneral => "dp_general",
            RateModel::DpSimple => "dp_simple",
        }
    }

    /// The `1/E` high-energy counterpart within the same family.
    pub fn simple_counterpart(self) -> RateModel {
        match self.family() {
            Family::Csl => RateModel::CslSimple,
            Family::Dp => RateModel::DpSimple,
        }
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        RateModel::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| Error::Format(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Markovian,
    Colored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    Csl(CslParams),
    Dp(DpParams),
}

impl ModelParams {
    pub fn family(&self) -> Family {
        match self {
            ModelParams::Csl(_) => Family::Csl,
            ModelParams::Dp(_) => Family::Dp,
        }
    }

    fn family_name(&self) -> &'static str {
        match self {
            ModelParams::Csl(_) => "CSL",
            ModelParams::Dp(_) => "DP",
        }
    }

    pub fn e_cutoff(&self) -> Option<f64> {
        match self {
            ModelParams::Csl(p) => p.e_cutoff,
            ModelParams::Dp(p) => p.e_cutoff,
        }
    }

    pub fn noise(&self) -> Noise {
        if self.e_cutoff().is_some() {
            Noise::Colored
        } else {
            Noise::Markovian
        }
    }

    /// r_C for CSL, R₀ for DP (m).
    pub fn correlation_length(&self) -> f64 {
        match self {
            ModelParams::Csl(p) => p.r_c,
            ModelParams::Dp(p) => p.r0,
        }
    }

    pub fn with_correlation_length(self, length: f64) -> Result<Self> {
        match self {
            ModelParams::Csl(p) => Ok(ModelParams::Csl(CslParams { r_c: length, ..p }.validated()?)),
            ModelParams::Dp(p) => Ok(ModelParams::Dp(DpParams { r0: length, ..p }.validated()?)),
        }
    }

    /// Energy-independent prefactor shared by the general and simple rates of
    /// the family (1/s); rate = prefactor / E · structure factor.
    pub fn prefactor(&self) -> f64 {
        match self {
            ModelParams::Csl(p) => p.prefactor(),
            ModelParams::Dp(p) => p.prefactor(),
        }
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            ModelParams::Csl(p) => Ok(ModelParams::Csl(p.validated()?)),
            ModelParams::Dp(p) => Ok(ModelParams::Dp(p.validated()?)),
        }
    }
}

impl From<CslParams> for ModelParams {
    fn from(p: CslParams) -> Self {
        ModelParams::Csl(p)
    }
}

impl From<DpParams> for ModelParams {
    fn from(p: DpParams) -> Self {
        ModelParams::Dp(p)
    }
}

/// Evaluates one rate formula at one energy, 1/(s·keV).
pub fn evaluate_rate(
    model: RateModel,
    atom: &Atom,
    energy: Energy,
    params: &ModelParams,
    geom: &PairGeometry,
) -> Result<f64> {
    match (model, params) {
        (RateModel::CslGeneral, ModelParams::Csl(p)) => csl::csl_rate_general(atom, energy, p, geom),
        (RateModel::CslSimple, ModelParams::Csl(p)) => csl::csl_rate_simple(atom, energy, p),
        (RateModel::CslLongwave, ModelParams::Csl(p)) => csl::csl_rate_longwave(atom, energy, p),
        (RateModel::DpGeneral, ModelParams::Dp(p)) => dp::dp_rate_general(atom, energy, p, geom),
        (RateModel::DpSimple, ModelParams::Dp(p)) => dp::dp_rate_simple(atom, energy, p),
        (m, p) => Err(Error::ModelMismatch { model: m.as_str(), given: p.family_name() }),
    }
}

/// Everything needed to recompute a spectrum bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub params: ModelParams,
    pub geometry: PairGeometry,
    pub atom: AtomDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: EnergyGrid,
    /// Rates in 1/(s·keV), or shapes in 1/keV once normalized.
    pub values: Vec<f64>,
    pub model: RateModel,
    pub noise: Noise,
    pub atom_symbol: String,
    pub params_echo: ParamsEcho,
    /// Some value is negative (cancellation-dominated structure factor).
    pub negativity_flag: bool,
    /// Some grid energy lies below the 1 keV validity floor.
    pub sub_kev_flag: bool,
    /// Values were divided by the family's constant prefactor.
    pub normalized: bool,
}

impl Spectrum {
    pub fn model_tag(&self) -> String {
        let noise = match self.noise {
            Noise::Markovian => "markovian",
            Noise::Colored => "colored",
        };
        format!("{}:{}", self.model.as_str(), noise)
    }

    pub fn energies(&self) -> &[f64] {
        self.grid.points()
    }

    fn refresh_flags(&mut self) {
        self.negativity_flag = self.values.iter().any(|v| *v < 0.0);
        self.sub_kev_flag = self.grid.points().iter().any(|e| *e < VALIDITY_FLOOR_KEV);
    }
}

/// Evaluates `model` at every grid energy. Points are computed in parallel;
/// each value is produced by the same scalar call, so the output does not
/// depend on scheduling.
pub fn compute_spectrum(
    model: RateModel,
    atom: &Atom,
    params: &ModelParams,
    geom: &PairGeometry,
    grid: &EnergyGrid,
) -> Result<Spectrum> {
    let params = params.validated()?;
    if model.family() != params.family() {
        return Err(Error::ModelMismatch { model: model.as_str(), given: params.family_name() });
    }
    let values = grid
        .points()
        .par_iter()
        .map(|&e| evaluate_rate(model, atom, Energy::from_kev(e)?, &params, geom))
        .collect::<Result<Vec<f64>>>()?;
    let mut spectrum = Spectrum {
        grid: grid.clone(),
        values,
        model,
        noise: params.noise(),
        atom_symbol: atom.symbol().to_string(),
        params_echo: ParamsEcho { params, geometry: *geom, atom: atom.to_document() },
        negativity_flag: false,
        sub_kev_flag: false,
        normalized: false,
    };
    spectrum.refresh_flags();
    Ok(spectrum)
}

/// Divides a spectrum by its family's constant prefactor, leaving
/// `structure factor / E` (1/keV). The CSL simple shape becomes
/// `3(N_p² + N_e)/E`; the colored filter stays in the shape.
pub fn normalize_shape(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.normalized {
        return Err(Error::AlreadyNormalized);
    }
    let prefactor = spectrum.params_echo.params.prefactor();
    ensure_positive("rate prefactor", prefactor)?;
    let mut out = spectrum.clone();
    for v in &mut out.values {
        *v /= prefactor;
    }
    out.normalized = true;
    out.refresh_flags();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBand {
    pub alphas: Vec<f64>,
    pub lower: Spectrum,
    pub mid: Spectrum,
    pub upper: Spectrum,
}

/// Pointwise envelope of spectra over `n_samples` α values spread evenly
/// over `[lo, hi]` (endpoints and midpoint always included). `mid` is the
/// spectrum at α = (lo + hi)/2; β is taken from `geom`.
pub fn alpha_band(
    model: RateModel,
    atom: &Atom,
    params: &ModelParams,
    geom: &PairGeometry,
    grid: &EnergyGrid,
    alpha_range: (f64, f64),
    n_samples: usize,
) -> Result<AlphaBand> {
    let (lo, hi) = alpha_range;
    ensure_positive("alpha lower bound", lo)?;
    ensure_positive("alpha upper bound", hi)?;
    if lo > hi {
        return Err(Error::param("alpha upper bound", "at least the lower bound", hi));
    }
    let mid_alpha = 0.5 * (lo + hi);
    let mut alphas = vec![lo, mid_alpha, hi];
    if n_samples > 1 && hi > lo {
        let step = (hi - lo) / (n_samples - 1) as f64;
        alphas.extend((1..n_samples - 1).map(|i| lo + step * i as f64));
    }
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mid = compute_spectrum(model, atom, params, &geom.with_alpha(mid_alpha)?, grid)?;
    let mut lower = mid.clone();
    let mut upper = mid.clone();
    for &alpha in &alphas {
        let s = compute_spectrum(model, atom, params, &geom.with_alpha(alpha)?, grid)?;
        for (i, v) in s.values.iter().enumerate() {
            lower.values[i] = lower.values[i].min(*v);
            upper.values[i] = upper.values[i].max(*v);
        }
    }
    lower.refresh_flags();
    upper.refresh_flags();
    Ok(AlphaBand { alphas, lower, mid, upper })
}

fn check_comparable(a: &Spectrum, b: &Spectrum) -> Result<()> {
    if a.grid.points() != b.grid.points() {
        return Err(Error::GridMismatch("energy grids differ".into()));
    }
    if a.atom_symbol != b.atom_symbol {
        return Err(Error::GridMismatch(format!("atoms differ: {} vs {}", a.atom_symbol, b.atom_symbol)));
    }
    Ok(())
}

/// `|a/b − 1|`, zero when the values coincide.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a / b - 1.0).abs()
    }
}

/// Smallest grid energy E* with `|general/simple − 1| < rel_tol` at E* and at
/// every grid point above it. `None` when the last point already fails.
pub fn convergence_energy(general: &Spectrum, simple: &Spectrum, rel_tol: f64) -> Result<Option<f64>> {
    check_comparable(general, simple)?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::param("rel_tol", "in (0, 1)", rel_tol));
    }
    let mut first_ok = None;
    for i in (0..general.values.len()).rev() {
        if relative_deviation(general.values[i], simple.values[i]) < rel_tol {
            first_ok = Some(i);
        } else {
            break;
        }
    }
    Ok(first_ok.map(|i| general.grid.points()[i]))
}

/// Per-point `a/b` for two spectra on the same grid.
pub fn ratio(a: &Spectrum, b: &Spectrum) -> Result<Vec<f64>> {
    check_comparable(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| if x == y { 1.0 } else { x / y }).collect())
}

/// Ratio of the Markovian rate of `model` to its `E → ∞` limit, i.e. the
/// structure factor over `3(N_p² + N_e)` (CSL) or `N_p² + N_e` (DP).
/// 1 means no cancellation, 0 full cancellation.
pub fn cancellation_factor(
    atom: &Atom,
    energy: Energy,
    model: RateModel,
    params: &ModelParams,
    geom: &PairGeometry,
) -> Result<f64> {
    let n_p = f64::from(atom.n_protons());
    let n_e = f64::from(atom.n_electrons());
    let incoherent = n_p * n_p + n_e;
    match (model, params.validated()?) {
        (RateModel::CslGeneral, ModelParams::Csl(p)) => {
            Ok(csl::csl_structure_factor(atom, energy, p.r_c, geom)? / (3.0 * incoherent))
        }
        (RateModel::DpGeneral, ModelParams::Dp(p)) => {
            Ok(dp::dp_structure_factor(atom, energy, p.r0, geom)? / incoherent)
        }
        (RateModel::CslSimple, ModelParams::Csl(_)) | (RateModel::DpSimple, ModelParams::Dp(_)) => Ok(1.0),
        (RateModel::CslLongwave, ModelParams::Csl(_)) => Ok((n_p - n_e) * (n_p - n_e) / incoherent),
        (m, p) => Err(Error::ModelMismatch { model: m.as_str(), given: p.family_name() }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub symbol: String,
    pub n_protons: u32,
    /// 1/(s·keV).
    pub rate: f64,
    pub cancellation_factor: f64,
}

/// Rate and cancellation factor of each atom at one energy, highest rate
/// first.
pub fn z_survey(
    atoms: &[Atom],
    energy: Energy,
    model: RateModel,
    params: &ModelParams,
    geom: &PairGeometry,
) -> Result<Vec<SurveyRow>> {
    if atoms.is_empty() {
        return Err(Error::param("atom count", "at least 1", 0.0));
    }
    let mut rows = atoms
        .iter()
        .map(|atom| {
            Ok(SurveyRow {
                symbol: atom.symbol().to_string(),
                n_protons: atom.n_protons(),
                rate: evaluate_rate(model, atom, energy, params, geom)?,
                cancellation_factor: cancellation_factor(atom, energy, model, params, geom)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.rate.total_cmp(&a.rate));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::builtin_atom;

    const RC: f64 = 1.15e-8;

    fn csl() -> ModelParams {
        CslParams::markovian(1.0, RC).unwrap().into()
    }

    #[test]
    fn grid_constructors() {
        let g = EnergyGrid::log(1.0, 1000.0, 4).unwrap();
        assert_eq!(g.points()[0], 1.0);
        assert_eq!(g.points()[3], 1000.0);
        assert!((g.points()[1] - 10.0).abs() < 1e-12);
        assert_eq!(EnergyGrid::default().len(), 512);
        assert!(EnergyGrid::linear(1.0, 1.0, 3).is_err());
        assert!(EnergyGrid::log(1.0, 10.0, 1).is_err());
        assert!(EnergyGrid::from_points(vec![2.0, 1.0]).is_err());
        assert!(EnergyGrid::from_points(vec![0.0, 1.0]).is_err());
        assert!(EnergyGrid::from_points(vec![1e-12]).is_ok());
    }

    #[test]
    fn model_tag_parsing() {
        assert_eq!("csl-general".parse::<RateModel>().unwrap(), RateModel::CslGeneral);
        assert_eq!("DP_SIMPLE".parse::<RateModel>().unwrap(), RateModel::DpSimple);
        assert!("grw".parse::<RateModel>().is_err());
    }

    #[test]
    fn simple_spectrum_is_one_over_e() {
        let ge = builtin_atom("Ge").unwrap();
        let grid = EnergyGrid::from_points(vec![10.0, 100.0]).unwrap();
        let s = compute_spectrum(RateModel::CslSimple, &ge, &csl(), &PairGeometry::default(), &grid).unwrap();
        assert!((s.values[0] / s.values[1] - 10.0).abs() < 1e-12);
        assert!(!s.negativity_flag && !s.sub_kev_flag);
        assert_eq!(s.model_tag(), "csl_simple:markovian");
    }

    #[test]
    fn mismatched_params_rejected() {
        let ge = builtin_atom("Ge").unwrap();
        let dp: ModelParams = DpParams::markovian(0.54e-10).unwrap().into();
        let err = compute_spectrum(RateModel::CslGeneral, &ge, &dp, &PairGeometry::default(), &EnergyGrid::default());
        assert!(matches!(err, Err(Error::ModelMismatch { .. })));
    }

    #[test]
    fn sub_kev_flag_set() {
        let ge = builtin_atom("Ge").unwrap();
        let grid = EnergyGrid::from_points(vec![0.5, 2.0]).unwrap();
        let s = compute_spectrum(RateModel::CslGeneral, &ge, &csl(), &PairGeometry::default(), &grid).unwrap();
        assert!(s.sub_kev_flag);
    }

    #[test]
    fn normalization_contract() {
        let ge = builtin_atom("Ge").unwrap();
        let grid = EnergyGrid::from_points(vec![3.0, 30.0]).unwrap();
        let s = compute_spectrum(RateModel::CslSimple, &ge, &csl(), &PairGeometry::default(), &grid).unwrap();
        let n = normalize_shape(&s).unwrap();
        for (e, v) in grid.points().iter().zip(&n.values) {
            assert!((v * e / (3.0 * 1056.0) - 1.0).abs() < 1e-13);
        }
        assert!(matches!(normalize_shape(&n), Err(Error::AlreadyNormalized)));
        let zero = compute_spectrum(
            RateModel::CslSimple,
            &ge,
            &CslParams::markovian(0.0, RC).unwrap().into(),
            &PairGeometry::default(),
            &grid,
        )
        .unwrap();
        assert!(normalize_shape(&zero).is_err());
    }

    #[test]
    fn degenerate_band() {
        let ge = builtin_atom("Ge").unwrap();
        let grid = EnergyGrid::log(1.0, 100.0, 16).unwrap();
        let band =
            alpha_band(RateModel::CslGeneral, &ge, &csl(), &PairGeometry::default(), &grid, (1.2, 1.2), 5).unwrap();
        assert_eq!(band.lower.values, band.mid.values);
        assert_eq!(band.upper.values, band.mid.values);
        assert!(alpha_band(RateModel::CslGeneral, &ge, &csl(), &PairGeometry::default(), &grid, (1.5, 1.0), 5).is_err());
    }

    #[test]
    fn convergence_identical_and_mismatch() {
        let ge = builtin_atom("Ge").unwrap();
        let xe = builtin_atom("Xe").unwrap();
        let grid = EnergyGrid::log(1.0, 100.0, 8).unwrap();
        let a = compute_spectrum(RateModel::CslGeneral, &ge, &csl(), &PairGeometry::default(), &grid).unwrap();
        assert_eq!(convergence_energy(&a, &a, 0.05).unwrap(), Some(1.0));
        let b = compute_spectrum(RateModel::CslGeneral, &xe, &csl(), &PairGeometry::default(), &grid).unwrap();
        assert!(matches!(convergence_energy(&a, &b, 0.05), Err(Error::GridMismatch(_))));
        let other_grid = EnergyGrid::log(1.0, 200.0, 8).unwrap();
        let c = compute_spectrum(RateModel::CslGeneral, &ge, &csl(), &PairGeometry::default(), &other_grid).unwrap();
        assert!(convergence_energy(&a, &c, 0.05).is_err());
        assert!(convergence_energy(&a, &a, 1.0).is_err());
    }

    #[test]
    fn convergence_requires_whole_tail() {
        let ge = builtin_atom("Ge").unwrap();
        let grid = EnergyGrid::from_points(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut a = compute_spectrum(RateModel::CslSimple, &ge, &csl(), &PairGeometry::default(), &grid).unwrap();
        let b = a.clone();
        a.values[0] *= 1.01; // within tolerance
        a.values[1] *= 1.5; // outside
        assert_eq!(convergence_energy(&a, &b, 0.05).unwrap(), Some(3.0));
        a.values[3] *= 2.0;
        assert_eq!(convergence_energy(&a, &b, 0.05).unwrap(), None);
    }

    #[test]
    fn cancellation_limits() {
        let ge = builtin_atom("Ge").unwrap();
        let geom = PairGeometry::default();
        let huge: ModelParams = CslParams::markovian(1.0, 1.0).unwrap().into();
        let low =
            cancellation_factor(&ge, Energy::from_kev(1e-12).unwrap(), RateModel::CslGeneral, &huge, &geom).unwrap();
        assert!(low.abs() < 1e-9);
        let high =
            cancellation_factor(&ge, Energy::from_kev(1e6).unwrap(), RateModel::CslGeneral, &csl(), &geom).unwrap();
        assert!((high - 1.0).abs() < 1e-3);
        let simple =
            cancellation_factor(&ge, Energy::from_kev(5.0).unwrap(), RateModel::CslSimple, &csl(), &geom).unwrap();
        assert_eq!(simple, 1.0);
    }

    #[test]
    fn survey_single_and_sorted() {
        let ge = builtin_atom("Ge").unwrap();
        let xe = builtin_atom("Xe").unwrap();
        let e = Energy::from_kev(500.0).unwrap();
        let rows = z_survey(&[ge.clone()], e, RateModel::CslSimple, &csl(), &PairGeometry::default()).unwrap();
        assert_eq!(rows.len(), 1);
        let rows = z_survey(&[ge, xe], e, RateModel::CslSimple, &csl(), &PairGeometry::default()).unwrap();
        assert_eq!(rows[0].symbol, "Xe");
        assert!((rows[0].rate / rows[1].rate - 2970.0 / 1056.0).abs() < 1e-12);
        assert!(z_survey(&[], e, RateModel::CslSimple, &csl(), &PairGeometry::default()).is_err());
    }
}
