//! Diósi–Penrose spontaneous-emission rates.
//!
//! With `P = Ge² / (12π^{5/2}ε₀c³R₀³)` the general rate is
//!
//! ```text
//! dΓ/dE = P / E · S_DP(E)
//! S_DP = Σ_pairs q_i q_j · sinc(d_ij E/ħc) · e^{-d²/4R₀²}
//! ```
//!
//! Unlike CSL there is no `(3 − d²/2r_C²)` polynomial. Rates follow Diósi's
//! original normalization; multiply by [`PENROSE_CONVENTION_FACTOR`] to
//! compare with results quoted in Penrose's convention.

use serde::{Deserialize, Serialize};

use crate::atom::{enumerate_pairs, Atom, PairGeometry, PairTerm};
use crate::csl::apply_cutoff;
use crate::error::{ensure_nonnegative, ensure_positive, Result};
use crate::quadrature;
use crate::units::{photon_argument_unchecked, sinc_unchecked, Energy, CODATA_2018};

/// Ratio between DP rates in Penrose's convention and in Diósi's (8π).
pub const PENROSE_CONVENTION_FACTOR: f64 = 8.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    /// Mass-density resolution length R₀ (m).
    pub r0: f64,
    /// Colored-noise cutoff (keV); `None` is the Markovian model.
    pub e_cutoff: Option<f64>,
}

impl DpParams {
    pub fn markovian(r0: f64) -> Result<Self> {
        DpParams { r0, e_cutoff: None }.validated()
    }

    pub fn colored(r0: f64, e_cutoff: f64) -> Result<Self> {
        DpParams { r0, e_cutoff: Some(e_cutoff) }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        ensure_positive("r0", self.r0)?;
        if let Some(ec) = self.e_cutoff {
            ensure_positive("e_cutoff", ec)?;
        }
        Ok(self)
    }

    /// `Ge² / (12π^{5/2}ε₀c³R₀³)` in 1/s.
    pub fn prefactor(&self) -> f64 {
        let k = CODATA_2018;
        k.g_newton * k.e_charge * k.e_charge
            / (12.0 * std::f64::consts::PI.powf(2.5) * k.epsilon0 * k.c.powi(3) * self.r0.powi(3))
    }
}

/// Overlap kernel of two Gaussian mass densities of width R₀:
/// `e^{-d²/4R₀²} / (2√π R₀³)`.
pub fn dp_f_ij_gaussian(distance: f64, r0: f64) -> Result<f64> {
    ensure_nonnegative("distance", distance)?;
    ensure_positive("r0", r0)?;
    let u = distance / r0;
    Ok((-0.25 * u * u).exp() / (2.0 * std::f64::consts::PI.sqrt() * r0.powi(3)))
}

/// `4π ∫ d³r g(r) g(r − d)` for `g(r) = (2πR₀²)^{-3/2} e^{-r²/2R₀²}`, by
/// quadrature. Independent check of [`dp_f_ij_gaussian`].
///
/// The integral is taken in units of R₀. After the angular average of the
/// displaced Gaussian only a radial integral remains.
pub fn dp_overlap_integral(distance: f64, r0: f64) -> Result<f64> {
    ensure_nonnegative("distance", distance)?;
    ensure_positive("r0", r0)?;
    let d = distance / r0;
    let four_pi = 4.0 * std::f64::consts::PI;
    let norm = (2.0 * std::f64::consts::PI).powf(-3.0);
    let integrand = |u: f64| {
        let x = u * d;
        let shell_avg = if x < 1e-300 { 1.0 } else { -(-2.0 * x).exp_m1() / (2.0 * x) };
        u * u * (-0.5 * u * u).exp() * (-0.5 * (u - d) * (u - d)).exp() * shell_avg
    };
    let hi = d + 40.0;
    let mut total = 0.0;
    for w in [0.0, 0.5 * d, hi].windows(2) {
        if w[1] > w[0] {
            total += quadrature::integrate(integrand, w[0], w[1], 1e-12, 1e-300, 4000)?.value;
        }
    }
    Ok(four_pi * four_pi * norm * total / r0.powi(3))
}

pub(crate) fn dp_pair_weight(distance: f64, r0: f64) -> f64 {
    let u = distance / r0;
    (-0.25 * u * u).exp()
}

pub(crate) fn dp_structure_from_terms(terms: &[PairTerm], energy: Energy, r0: f64) -> f64 {
    terms
        .iter()
        .map(|t| {
            let phase = photon_argument_unchecked(t.distance, energy);
            t.kind.charge_sign() * t.multiplicity as f64 * sinc_unchecked(phase) * dp_pair_weight(t.distance, r0)
        })
        .sum()
}

/// Braces of the general DP rate: `N_p² + N_e` plus the interfering
/// proton–electron, same-shell and cross-shell terms.
pub fn dp_structure_factor(atom: &Atom, energy: Energy, r0: f64, geom: &PairGeometry) -> Result<f64> {
    ensure_positive("r0", r0)?;
    Ok(dp_structure_from_terms(&enumerate_pairs(atom, geom), energy, r0))
}

/// General DP rate per atom, 1/(s·keV).
pub fn dp_rate_general(atom: &Atom, energy: Energy, params: &DpParams, geom: &PairGeometry) -> Result<f64> {
    let params = params.validated()?;
    let structure = dp_structure_factor(atom, energy, params.r0, geom)?;
    let white = params.prefactor() / energy.kev() * structure;
    Ok(apply_cutoff(white, energy, params.e_cutoff))
}

/// High-energy DP rate `Ge²(N_p² + N_e) / (12π^{5/2}ε₀c³R₀³E)`, 1/(s·keV).
pub fn dp_rate_simple(atom: &Atom, energy: Energy, params: &DpParams) -> Result<f64> {
    let params = params.validated()?;
    let n_p = f64::from(atom.n_protons());
    let n_e = f64::from(atom.n_electrons());
    let white = params.prefactor() / energy.kev() * (n_p * n_p + n_e);
    Ok(apply_cutoff(white, energy, params.e_cutoff))
}
