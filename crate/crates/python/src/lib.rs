//! Python bindings. Import name: `collapse_radiance`.
//!
//! Energies are plain floats in keV, lengths in metres, rates in 1/(s·keV).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::collapse_radiance as core;
use ::collapse_radiance::inference::{self, Detector, FitModel, IterationSettings, ProfileChi2};
use ::collapse_radiance::{spectra, Energy, EnergyGrid, ModelParams, RateModel};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kev(e: f64) -> PyResult<Energy> {
    Energy::from_kev(e).map_err(err)
}

fn model(name: &str) -> PyResult<RateModel> {
    name.parse().map_err(err)
}

#[pyclass(name = "Atom", module = "collapse_radiance", frozen)]
pub struct PyAtom(core::Atom);

#[pymethods]
impl PyAtom {
    /// Shipped atom by symbol ("Ge", "Xe").
    #[staticmethod]
    fn builtin(symbol: &str) -> PyResult<Self> {
        core::builtin_atom(symbol).map(PyAtom).map_err(err)
    }

    /// Atom from a JSON document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::parse_atom(text).map(PyAtom).map_err(err)
    }

    #[getter]
    fn symbol(&self) -> &str {
        self.0.symbol()
    }

    #[getter]
    fn n_protons(&self) -> u32 {
        self.0.n_protons()
    }

    #[getter]
    fn n_electrons(&self) -> u32 {
        self.0.n_electrons()
    }

    #[getter]
    fn radii_provenance(&self) -> &str {
        self.0.radii_provenance()
    }

    /// `(label, occupancy, mean_radius_m)` per shell.
    #[getter]
    fn shells(&self) -> Vec<(String, u32, f64)> {
        self.0.shells().iter().map(|s| (s.label.clone(), s.occupancy, s.mean_radius)).collect()
    }

    /// `(kind, distance_m, multiplicity)` per charged-pair class.
    #[pyo3(signature = (geometry=None))]
    fn pairs(&self, geometry: Option<&PyPairGeometry>) -> Vec<(String, f64, u64)> {
        core::enumerate_pairs(&self.0, &geom(geometry))
            .iter()
            .map(|t| (format!("{:?}", t.kind), t.distance, t.multiplicity))
            .collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Atom({}, Z={}, shells={})", self.0.symbol(), self.0.n_protons(), self.0.shells().len())
    }
}

#[pyclass(name = "PairGeometry", module = "collapse_radiance", frozen)]
pub struct PyPairGeometry(core::PairGeometry);

#[pymethods]
impl PyPairGeometry {
    #[new]
    #[pyo3(signature = (alpha=core::PairGeometry::DEFAULT_ALPHA, beta=core::PairGeometry::DEFAULT_BETA))]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        core::PairGeometry::new(alpha, beta).map(PyPairGeometry).map_err(err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn __repr__(&self) -> String {
        format!("PairGeometry(alpha={}, beta={})", self.0.alpha, self.0.beta)
    }
}

fn geom(g: Option<&PyPairGeometry>) -> core::PairGeometry {
    g.map(|g| g.0).unwrap_or_default()
}

#[pyclass(name = "CslParams", module = "collapse_radiance", frozen)]
pub struct PyCslParams(core::CslParams);

#[pymethods]
impl PyCslParams {
    #[new]
    #[pyo3(signature = (lambda_rate, r_c, e_cutoff=None))]
    fn new(lambda_rate: f64, r_c: f64, e_cutoff: Option<f64>) -> PyResult<Self> {
        match e_cutoff {
            Some(ec) => core::CslParams::colored(lambda_rate, r_c, ec),
            None => core::CslParams::markovian(lambda_rate, r_c),
        }
        .map(PyCslParams)
        .map_err(err)
    }

    #[getter]
    fn lambda_rate(&self) -> f64 {
        self.0.lambda_rate
    }

    #[getter]
    fn r_c(&self) -> f64 {
        self.0.r_c
    }

    #[getter]
    fn e_cutoff(&self) -> Option<f64> {
        self.0.e_cutoff
    }

    fn __repr__(&self) -> String {
        format!("CslParams(lambda_rate={}, r_c={}, e_cutoff={:?})", self.0.lambda_rate, self.0.r_c, self.0.e_cutoff)
    }
}

#[pyclass(name = "DpParams", module = "collapse_radiance", frozen)]
pub struct PyDpParams(core::DpParams);

#[pymethods]
impl PyDpParams {
    #[new]
    #[pyo3(signature = (r0, e_cutoff=None))]
    fn new(r0: f64, e_cutoff: Option<f64>) -> PyResult<Self> {
        match e_cutoff {
            Some(ec) => core::DpParams::colored(r0, ec),
            None => core::DpParams::markovian(r0),
        }
        .map(PyDpParams)
        .map_err(err)
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.0.r0
    }

    #[getter]
    fn e_cutoff(&self) -> Option<f64> {
        self.0.e_cutoff
    }

    fn __repr__(&self) -> String {
        format!("DpParams(r0={}, e_cutoff={:?})", self.0.r0, self.0.e_cutoff)
    }
}

#[derive(FromPyObject)]
enum AnyParams<'py> {
    Csl(PyRef<'py, PyCslParams>),
    Dp(PyRef<'py, PyDpParams>),
}

impl AnyParams<'_> {
    fn get(&self) -> ModelParams {
        match self {
            AnyParams::Csl(p) => p.0.into(),
            AnyParams::Dp(p) => p.0.into(),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (atom, energy_kev, params, geometry=None))]
fn csl_rate_general(
    atom: &PyAtom,
    energy_kev: f64,
    params: &PyCslParams,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<f64> {
    core::csl::csl_rate_general(&atom.0, kev(energy_kev)?, &params.0, &geom(geometry)).map_err(err)
}

#[pyfunction]
fn csl_rate_simple(atom: &PyAtom, energy_kev: f64, params: &PyCslParams) -> PyResult<f64> {
    core::csl::csl_rate_simple(&atom.0, kev(energy_kev)?, &params.0).map_err(err)
}

#[pyfunction]
fn csl_rate_longwave(atom: &PyAtom, energy_kev: f64, params: &PyCslParams) -> PyResult<f64> {
    core::csl::csl_rate_longwave(&atom.0, kev(energy_kev)?, &params.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (atom, energy_kev, r_c, geometry=None))]
fn csl_structure_factor(atom: &PyAtom, energy_kev: f64, r_c: f64, geometry: Option<&PyPairGeometry>) -> PyResult<f64> {
    core::csl::csl_structure_factor(&atom.0, kev(energy_kev)?, r_c, &geom(geometry)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (atom, energy_kev, params, geometry=None))]
fn dp_rate_general(
    atom: &PyAtom,
    energy_kev: f64,
    params: &PyDpParams,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<f64> {
    core::dp::dp_rate_general(&atom.0, kev(energy_kev)?, &params.0, &geom(geometry)).map_err(err)
}

#[pyfunction]
fn dp_rate_simple(atom: &PyAtom, energy_kev: f64, params: &PyDpParams) -> PyResult<f64> {
    core::dp::dp_rate_simple(&atom.0, kev(energy_kev)?, &params.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (atom, energy_kev, r0, geometry=None))]
fn dp_structure_factor(atom: &PyAtom, energy_kev: f64, r0: f64, geometry: Option<&PyPairGeometry>) -> PyResult<f64> {
    core::dp::dp_structure_factor(&atom.0, kev(energy_kev)?, r0, &geom(geometry)).map_err(err)
}

#[pyfunction]
fn colored_filter(energy_kev: f64, e_cutoff: f64) -> PyResult<f64> {
    core::csl::colored_filter(kev(energy_kev)?, e_cutoff).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (model, atom, energy_kev, params, geometry=None))]
fn cancellation_factor(
    model: &str,
    atom: &PyAtom,
    energy_kev: f64,
    params: AnyParams<'_>,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<f64> {
    spectra::cancellation_factor(&atom.0, kev(energy_kev)?, self::model(model)?, &params.get(), &geom(geometry))
        .map_err(err)
}

#[pyclass(name = "Spectrum", module = "collapse_radiance", frozen)]
pub struct PySpectrum(spectra::Spectrum);

#[pymethods]
impl PySpectrum {
    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.0.energies().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    #[getter]
    fn model_tag(&self) -> String {
        self.0.model_tag()
    }

    #[getter]
    fn atom(&self) -> &str {
        &self.0.atom_symbol
    }

    #[getter]
    fn negativity_flag(&self) -> bool {
        self.0.negativity_flag
    }

    #[getter]
    fn sub_kev_flag(&self) -> bool {
        self.0.sub_kev_flag
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.0.normalized
    }

    /// Shape with the constant prefactor divided out.
    fn normalize(&self) -> PyResult<Self> {
        spectra::normalize_shape(&self.0).map(PySpectrum).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        core::io::spectrum_to_json(&self.0, &core::io::Metadata::default()).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.values.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum({}, {}, {} points)", self.0.model_tag(), self.0.atom_symbol, self.0.values.len())
    }
}

/// Rates of `model` ("csl-general", "dp-simple", ...) at the given energies.
#[pyfunction]
#[pyo3(signature = (model, atom, params, energies_kev, geometry=None))]
fn compute_spectrum(
    model: &str,
    atom: &PyAtom,
    params: AnyParams<'_>,
    energies_kev: Vec<f64>,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<PySpectrum> {
    let grid = EnergyGrid::from_points(energies_kev).map_err(err)?;
    spectra::compute_spectrum(self::model(model)?, &atom.0, &params.get(), &geom(geometry), &grid)
        .map(PySpectrum)
        .map_err(err)
}

/// Smallest energy above which general and simple agree within `rel_tol`.
#[pyfunction]
fn convergence_energy(general: &PySpectrum, simple: &PySpectrum, rel_tol: f64) -> PyResult<Option<f64>> {
    spectra::convergence_energy(&general.0, &simple.0, rel_tol).map_err(err)
}

#[pyclass(name = "SyntheticSpectrum", module = "collapse_radiance", frozen)]
pub struct PySynthetic(inference::SyntheticSpectrum);

#[pymethods]
impl PySynthetic {
    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.0.counts.clone()
    }

    #[getter]
    fn bin_centers(&self) -> Vec<f64> {
        self.0.detector.centers.points().to_vec()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn clamped_flag(&self) -> bool {
        self.0.clamped_flag
    }

    fn to_json(&self) -> PyResult<String> {
        core::io::synthetic_to_json(&self.0, &core::io::Metadata::default()).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::io::synthetic_from_json(text).map(PySynthetic).map_err(err)
    }
}

/// Poisson counts in bins of uniform width, efficiency and background.
#[pyfunction]
#[pyo3(signature = (model, atom, params, bin_centers_kev, exposure_s, bin_width_kev=1.0, efficiency=1.0, background_rate=0.0, seed=42, geometry=None))]
#[allow(clippy::too_many_arguments)]
fn synth_counts(
    model: &str,
    atom: &PyAtom,
    params: AnyParams<'_>,
    bin_centers_kev: Vec<f64>,
    exposure_s: f64,
    bin_width_kev: f64,
    efficiency: f64,
    background_rate: f64,
    seed: u64,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<PySynthetic> {
    let centers = EnergyGrid::from_points(bin_centers_kev).map_err(err)?;
    let det = Detector::uniform(centers, bin_width_kev, exposure_s, efficiency, background_rate);
    inference::synth_counts(self::model(model)?, &atom.0, &params.get(), &geom(geometry), &det, seed)
        .map(PySynthetic)
        .map_err(err)
}

#[pyclass(name = "FitResult", module = "collapse_radiance", frozen, get_all)]
pub struct PyFitResult {
    amplitude: f64,
    amplitude_sigma: f64,
    amplitude_sigma_fixed_length: f64,
    corr_length: f64,
    corr_length_sigma: f64,
    converged: bool,
    chi2: f64,
    ndof: usize,
    /// `(prior, posterior)` per iteration.
    iterations: Vec<(f64, f64)>,
}

#[pymethods]
impl PyFitResult {
    fn __repr__(&self) -> String {
        format!(
            "FitResult(amplitude={:.6e}±{:.2e}, corr_length={:.6e}±{:.2e}, converged={}, iterations={})",
            self.amplitude,
            self.amplitude_sigma,
            self.corr_length,
            self.corr_length_sigma,
            if self.converged { "True" } else { "False" },
            self.iterations.len()
        )
    }
}

/// Iterates the correlation length from `prior` with the profile-χ² rule.
/// The atom defaults to the one recorded in the data.
#[pyfunction]
#[pyo3(signature = (data, model, prior, rel_tol=IterationSettings::DEFAULT_REL_TOL, max_iter=IterationSettings::DEFAULT_MAX_ITER, e_cutoff=None, atom=None, geometry=None))]
#[allow(clippy::too_many_arguments)]
fn fit(
    data: &PySynthetic,
    model: &str,
    prior: f64,
    rel_tol: f64,
    max_iter: usize,
    e_cutoff: Option<f64>,
    atom: Option<&PyAtom>,
    geometry: Option<&PyPairGeometry>,
) -> PyResult<PyFitResult> {
    let m = self::model(model)?;
    let template: ModelParams = match m.family() {
        spectra::Family::Csl => core::CslParams { lambda_rate: 1.0, r_c: prior, e_cutoff }.into(),
        spectra::Family::Dp => core::DpParams { r0: prior, e_cutoff }.into(),
    };
    let fit_model = FitModel::new(m, template).map_err(err)?;
    let atom = match atom {
        Some(a) => a.0.clone(),
        None => core::Atom::try_from(data.0.truth.atom.clone()).map_err(err)?,
    };
    let settings = IterationSettings { prior, rel_tol, max_iter };
    let r =
        inference::iterate_corr_length(&data.0, &fit_model, &atom, &geom(geometry), settings, &ProfileChi2::default())
            .map_err(err)?;
    Ok(PyFitResult {
        amplitude: r.amplitude,
        amplitude_sigma: r.amplitude_sigma,
        amplitude_sigma_fixed_length: r.amplitude_sigma_fixed_length,
        corr_length: r.corr_length,
        corr_length_sigma: r.corr_length_sigma,
        converged: r.converged,
        chi2: r.chi2,
        ndof: r.ndof,
        iterations: r.iterations.iter().map(|i| (i.prior, i.posterior)).collect(),
    })
}

#[pymodule]
#[pyo3(name = "collapse_radiance")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyAtom>()?;
    m.add_class::<PyPairGeometry>()?;
    m.add_class::<PyCslParams>()?;
    m.add_class::<PyDpParams>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PySynthetic>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(csl_rate_general, m)?)?;
    m.add_function(wrap_pyfunction!(csl_rate_simple, m)?)?;
    m.add_function(wrap_pyfunction!(csl_rate_longwave, m)?)?;
    m.add_function(wrap_pyfunction!(csl_structure_factor, m)?)?;
    m.add_function(wrap_pyfunction!(dp_rate_general, m)?)?;
    m.add_function(wrap_pyfunction!(dp_rate_simple, m)?)?;
    m.add_function(wrap_pyfunction!(dp_structure_factor, m)?)?;
    m.add_function(wrap_pyfunction!(colored_filter, m)?)?;
    m.add_function(wrap_pyfunction!(cancellation_factor, m)?)?;
    m.add_function(wrap_pyfunction!(compute_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_energy, m)?)?;
    m.add_function(wrap_pyfunction!(synth_counts, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
