//! Synthetic counting spectra and the iterative correlation-length fit.
//!
//! A measurement is modelled per bin as
//!
//! ```text
//! μ_i = (A · s_i · ε_i + b_i) · T · Δ_i
//! ```
//!
//! with `s_i` the unit-amplitude general rate at the bin centre, `ε_i` the
//! efficiency, `b_i` the background rate, `T` the exposure and `Δ_i` the bin
//! width. The amplitude `A` is λ for CSL (shape evaluated at λ = 1 s⁻¹) and a
//! multiplier of G for DP (shape evaluated with the physical G).
//!
//! The correlation length enters non-linearly through the shape, so it is
//! found by a fixed-point loop: fit `A` at the current length, ask an
//! [`UpdateRule`] for the next length, stop once the relative change drops
//! below tolerance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atom::{Atom, AtomDocument, PairGeometry};
use crate::csl::CslParams;
use crate::error::{ensure_positive, Error, Result};
use crate::spectra::{evaluate_rate, EnergyGrid, ModelParams, RateModel};

/// Parameters the counts were generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub model: RateModel,
    pub params: ModelParams,
    pub geometry: PairGeometry,
    pub atom: AtomDocument,
}

/// Binned detector response: one entry per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    /// Bin centres (keV).
    pub centers: EnergyGrid,
    /// Bin widths (keV).
    pub widths: Vec<f64>,
    /// Live exposure (s). For per-atom rates this is atom-seconds.
    pub exposure: f64,
    pub efficiency: Vec<f64>,
    /// Background rate, counts/(s·keV).
    pub background_rate: Vec<f64>,
}

impl Detector {
    /// Uniform width, efficiency and background over `centers`.
    pub fn uniform(centers: EnergyGrid, width: f64, exposure: f64, efficiency: f64, background_rate: f64) -> Self {
        let n = centers.len();
        Detector {
            centers,
            widths: vec![width; n],
            exposure,
            efficiency: vec![efficiency; n],
            background_rate: vec![background_rate; n],
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.centers.len();
        if self.widths.len() != n || self.efficiency.len() != n || self.background_rate.len() != n {
            return Err(Error::InvalidGrid("bin widths, efficiencies and backgrounds must match the bin count".into()));
        }
        ensure_positive("exposure", self.exposure)?;
        let c = self.centers.points();
        for (i, &w) in self.widths.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGrid(format!("bin {i}: width {w} is not positive")));
            }
            if c[i] - 0.5 * w < 0.0 {
                return Err(Error::InvalidGrid(format!("bin {i} extends below zero energy")));
            }
            if i + 1 < n && c[i] + 0.5 * w > c[i + 1] - 0.5 * self.widths[i + 1] + 1e-9 * c[i + 1] {
                return Err(Error::InvalidGrid(format!("bins {i} and {} overlap", i + 1)));
            }
        }
        if let Some(e) = self.efficiency.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::param("efficiency", "in [0, 1]", *e));
        }
        if let Some(b) = self.background_rate.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::param("background rate", "non-negative", *b));
        }
        Ok(())
    }

    /// `ε_i · T · Δ_i`: counts per unit rate.
    fn signal_scale(&self, i: usize) -> f64 {
        self.efficiency[i] * self.exposure * self.widths[i]
    }

    fn background_counts(&self, i: usize) -> f64 {
        self.background_rate[i] * self.exposure * self.widths[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpectrum {
    pub detector: Detector,
    pub counts: Vec<u64>,
    pub seed: u64,
    pub truth: Truth,
    /// Some model rate was negative and was clamped to zero for sampling.
    pub clamped_flag: bool,
}

/// Per-bin expected counts of `truth` seen through `detector`. Negative rates
/// are clamped to zero; the flag reports whether that happened.
pub fn expected_counts(
    truth_model: RateModel,
    atom: &Atom,
    params: &ModelParams,
    geom: &PairGeometry,
    detector: &Detector,
) -> Result<(Vec<f64>, bool)> {
    detector.validate()?;
    let mut clamped = false;
    let mut mu = Vec::with_capacity(detector.len());
    for (i, e) in detector.centers.energies().enumerate() {
        let rate = evaluate_rate(truth_model, atom, e, params, geom)?;
        if rate < 0.0 {
            clamped = true;
        }
        mu.push(rate.max(0.0) * detector.signal_scale(i) + detector.background_counts(i));
    }
    Ok((mu, clamped))
}

/// Draws Poisson counts for every bin.
///
/// Sampler: `ChaCha8Rng::seed_from_u64(seed)` feeding
/// `rand_distr::Poisson<f64>` bin by bin in grid order; bins with zero mean
/// yield zero without consuming randomness.
pub fn synth_counts(
    truth_model: RateModel,
    atom: &Atom,
    true_params: &ModelParams,
    geom: &PairGeometry,
    detector: &Detector,
    seed: u64,
) -> Result<SyntheticSpectrum> {
    let params = true_params.validated()?;
    let (mu, clamped_flag) = expected_counts(truth_model, atom, &params, geom, detector)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = mu
        .iter()
        .map(|&m| {
            if m <= 0.0 {
                return Ok(0);
            }
            let dist =
                Poisson::new(m).map_err(|_| Error::param("expected counts", "within the Poisson sampler range", m))?;
            Ok(dist.sample(&mut rng) as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(SyntheticSpectrum {
        detector: detector.clone(),
        counts,
        seed,
        truth: Truth { model: truth_model, params, geometry: *geom, atom: atom.to_document() },
        clamped_flag,
    })
}

/// One synthetic spectrum per seed, generated in parallel, returned in seed order.
pub fn synth_replicas(
    truth_model: RateModel,
    atom: &Atom,
    true_params: &ModelParams,
    geom: &PairGeometry,
    detector: &Detector,
    seeds: &[u64],
) -> Result<Vec<SyntheticSpectrum>> {
    seeds.par_iter().map(|&s| synth_counts(truth_model, atom, true_params, geom, detector, s)).collect()
}

/// Rate formula used for fitting plus the fixed parts of its parameters
/// (colored cutoff, and for CSL the λ slot which is replaced by 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub model: RateModel,
    pub template: ModelParams,
}

impl FitModel {
    pub fn new(model: RateModel, template: ModelParams) -> Result<Self> {
        if model.family() != template.family() {
            return Err(Error::ModelMismatch {
                model: model.as_str(),
                given: match template {
                    ModelParams::Csl(_) => "CSL",
                    ModelParams::Dp(_) => "DP",
                },
            });
        }
        Ok(FitModel { model, template })
    }

    /// Parameters giving unit amplitude at `corr_length`.
    pub fn unit_params(&self, corr_length: f64) -> Result<ModelParams> {
        let p = self.template.with_correlation_length(corr_length)?;
        Ok(match p {
            ModelParams::Csl(c) => ModelParams::Csl(CslParams { lambda_rate: 1.0, ..c }),
            dp => dp,
        })
    }

    /// Signal counts per unit amplitude, `s_i ε_i T Δ_i`.
    pub fn design(
        &self,
        data: &SyntheticSpectrum,
        atom: &Atom,
        corr_length: f64,
        geom: &PairGeometry,
    ) -> Result<Vec<f64>> {
        let params = self.unit_params(corr_length)?;
        let det = &data.detector;
        det.centers
            .energies()
            .enumerate()
            .map(|(i, e)| Ok(evaluate_rate(self.model, atom, e, &params, geom)? * det.signal_scale(i)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeFit {
    pub amplitude: f64,
    /// Standard error at fixed correlation length.
    pub sigma: f64,
    pub chi2: f64,
    pub ndof: usize,
}

const REWEIGHT_PASSES: usize = 3;

fn weighted_amplitude(counts: &[u64], design: &[f64], background: &[f64]) -> Result<AmplitudeFit> {
    let n = counts.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} bins leave no degrees of freedom")));
    }
    if design.iter().all(|a| *a == 0.0) {
        return Err(Error::DegenerateFit("model shape is zero in every bin".into()));
    }
    // Neyman weights first, then Pearson weights from the current prediction.
    let mut weights: Vec<f64> = counts.iter().map(|&c| 1.0 / (c.max(1) as f64)).collect();
    let mut fit = AmplitudeFit { amplitude: 0.0, sigma: 0.0, chi2: 0.0, ndof: n - 1 };
    for pass in 0..=REWEIGHT_PASSES {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            num += weights[i] * design[i] * (counts[i] as f64 - background[i]);
            den += weights[i] * design[i] * design[i];
        }
        if !(den > 0.0) {
            return Err(Error::DegenerateFit("design has no weight".into()));
        }
        fit.amplitude = num / den;
        fit.sigma = den.sqrt().recip();
        if pass < REWEIGHT_PASSES {
            for i in 0..n {
                let mu = fit.amplitude * design[i] + background[i];
                weights[i] = if mu > 0.0 { 1.0 / mu } else { 1.0 };
            }
        }
    }
    fit.chi2 = (0..n)
        .map(|i| {
            let r = counts[i] as f64 - (fit.amplitude * design[i] + background[i]);
            weights[i] * r * r
        })
        .sum();
    Ok(fit)
}

/// Weighted least-squares amplitude at a fixed correlation length.
pub fn fit_amplitude(
    data: &SyntheticSpectrum,
    model: &FitModel,
    atom: &Atom,
    corr_length: f64,
    geom: &PairGeometry,
) -> Result<AmplitudeFit> {
    ensure_positive("correlation length", corr_length)?;
    data.detector.validate()?;
    let design = model.design(data, atom, corr_length, geom)?;
    let background: Vec<f64> = (0..data.detector.len()).map(|i| data.detector.background_counts(i)).collect();
    weighted_amplitude(&data.counts, &design, &background)
}

/// Inputs handed to an [`UpdateRule`] at each iteration.
pub struct UpdateContext<'a> {
    pub data: &'a SyntheticSpectrum,
    pub model: &'a FitModel,
    pub atom: &'a Atom,
    pub geometry: &'a PairGeometry,
    pub iteration: usize,
    pub corr_length: f64,
    pub fit: AmplitudeFit,
}

impl UpdateContext<'_> {
    /// χ² with the amplitude re-fitted at `corr_length`.
    pub fn profile_chi2(&self, corr_length: f64) -> Result<f64> {
        Ok(fit_amplitude(self.data, self.model, self.atom, corr_length, self.geometry)?.chi2)
    }
}

/// Maps the current correlation length and fit to the next prior.
pub trait UpdateRule {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<f64>;

    fn name(&self) -> &str {
        "custom"
    }
}

impl<F> UpdateRule for F
where
    F: Fn(&UpdateContext<'_>) -> f64,
{
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<f64> {
        Ok(self(ctx))
    }
}

/// Returns the prior unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepPrior;

impl UpdateRule for KeepPrior {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<f64> {
        Ok(ctx.corr_length)
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Default rule: minimize the profile χ² (amplitude re-fitted at every
/// trial length) over `[L/span, L·span]` around the current length `L`.
/// A log-spaced scan brackets the minimum, golden-section search refines it.
#[derive(Debug, Clone, Copy)]
pub struct ProfileChi2 {
    pub span: f64,
    pub scan_points: usize,
    /// Relative width of the final bracket.
    pub tolerance: f64,
}

impl Default for ProfileChi2 {
    fn default() -> Self {
        ProfileChi2 { span: 30.0, scan_points: 41, tolerance: 1e-9 }
    }
}

impl UpdateRule for ProfileChi2 {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<f64> {
        let center = ctx.corr_length.ln();
        let half = self.span.ln();
        let n = self.scan_points.max(3);
        let xs: Vec<f64> = (0..n).map(|i| center - half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let chi = |x: f64| -> f64 { ctx.profile_chi2(x.exp()).unwrap_or(f64::INFINITY) };
        let values: Vec<f64> = xs.iter().map(|&x| chi(x)).collect();
        let best =
            values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("scan is non-empty");
        if !values[best].is_finite() {
            return Ok(f64::NAN);
        }
        let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(n - 1)]);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (chi(c), chi(d));
        while (b - a) > self.tolerance {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = chi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = chi(d);
            }
        }
        Ok((0.5 * (a + b)).exp())
    }

    fn name(&self) -> &str {
        "profile_chi2"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub prior: f64,
    pub posterior: f64,
    pub amplitude: f64,
    pub chi2: f64,
    /// |posterior − prior| / prior.
    pub rel_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: RateModel,
    pub update_rule: String,
    /// λ (1/s) for CSL, G multiplier for DP, fitted at `corr_length`.
    pub amplitude: f64,
    /// Amplitude standard error with the correlation length free as well
    /// (from the 2×2 Fisher matrix).
    pub amplitude_sigma: f64,
    /// Amplitude standard error at fixed correlation length.
    pub amplitude_sigma_fixed_length: f64,
    pub corr_length: f64,
    pub corr_length_sigma: f64,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub chi2: f64,
    pub ndof: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSettings {
    pub prior: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl IterationSettings {
    pub const DEFAULT_REL_TOL: f64 = 1e-3;
    pub const DEFAULT_MAX_ITER: usize = 50;

    pub fn new(prior: f64) -> Self {
        IterationSettings { prior, rel_tol: Self::DEFAULT_REL_TOL, max_iter: Self::DEFAULT_MAX_ITER }
    }
}

/// Fixed-point iteration on the correlation length.
pub fn iterate_corr_length(
    data: &SyntheticSpectrum,
    model: &FitModel,
    atom: &Atom,
    geom: &PairGeometry,
    settings: IterationSettings,
    rule: &dyn UpdateRule,
) -> Result<FitResult> {
    ensure_positive("prior", settings.prior)?;
    ensure_positive("rel_tol", settings.rel_tol)?;
    if settings.max_iter == 0 {
        return Err(Error::param("max_iter", "at least 1", 0.0));
    }
    let mut trace = Vec::new();
    let mut length = settings.prior;
    let mut converged = false;
    for iteration in 1..=settings.max_iter {
        let fit = fit_amplitude(data, model, atom, length, geom)?;
        let ctx = UpdateContext { data, model, atom, geometry: geom, iteration, corr_length: length, fit };
        let next = rule.update(&ctx)?;
        if !(next.is_finite() && next > 0.0) {
            return Err(Error::NonFiniteUpdate { iteration, trace });
        }
        let rel_change = (next - length).abs() / length;
        trace.push(IterationRecord {
            prior: length,
            posterior: next,
            amplitude: fit.amplitude,
            chi2: fit.chi2,
            rel_change,
        });
        length = next;
        if rel_change < settings.rel_tol {
            converged = true;
            break;
        }
    }

    let fit = fit_amplitude(data, model, atom, length, geom)?;
    let (amplitude_sigma, corr_length_sigma) = joint_sigmas(data, model, atom, geom, length, fit.amplitude)?;
    Ok(FitResult {
        model: model.model,
        update_rule: rule.name().to_string(),
        amplitude: fit.amplitude,
        amplitude_sigma,
        amplitude_sigma_fixed_length: fit.sigma,
        corr_length: length,
        corr_length_sigma,
        iterations: trace,
        converged,
        chi2: fit.chi2,
        ndof: fit.ndof,
    })
}

/// Standard errors of (amplitude, length) from the Fisher matrix of the
/// Pearson χ², with ∂μ/∂L by central differences in ln L.
fn joint_sigmas(
    data: &SyntheticSpectrum,
    model: &FitModel,
    atom: &Atom,
    geom: &PairGeometry,
    length: f64,
    amplitude: f64,
) -> Result<(f64, f64)> {
    let h: f64 = 1e-4;
    let design = model.design(data, atom, length, geom)?;
    let up = model.design(data, atom, length * h.exp(), geom)?;
    let down = model.design(data, atom, length * (-h).exp(), geom)?;
    let (mut faa, mut fal, mut fll) = (0.0, 0.0, 0.0);
    for i in 0..design.len() {
        let mu = amplitude * design[i] + data.detector.background_counts(i);
        if mu <= 0.0 {
            continue;
        }
        let da = design[i];
        // ∂μ/∂L = A · ∂s/∂lnL / L
        let dl = amplitude * (up[i] - down[i]) / (2.0 * h) / length;
        faa += da * da / mu;
        fal += da * dl / mu;
        fll += dl * dl / mu;
    }
    let det = faa * fll - fal * fal;
    if !(det > 0.0) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    Ok(((fll / det).sqrt(), (faa / det).sqrt()))
}
