//! CSL spontaneous-emission rates.
//!
//! With `P = ħe²λ / (12π²ε₀c³m₀²r_C²)` the general rate is
//!
//! ```text
//! dΓ/dE = P / E · S_CSL(E)
//! S_CSL = Σ_pairs q_i q_j · sinc(d_ij E/ħc) · e^{-d²/4r_C²} (3 − d²/2r_C²)
//! ```
//!
//! where the pair sum comes from [`crate::enumerate_pairs`]. The simple rate
//! replaces `S_CSL` by its high-energy limit `3(N_p² + N_e)`, the long-wave
//! rate by its low-energy limit `3(N_p − N_e)²`.

use serde::{Deserialize, Serialize};

use crate::atom::{enumerate_pairs, Atom, PairGeometry, PairTerm};
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::quadrature;
use crate::units::{photon_argument_unchecked, sinc_unchecked, Energy, CODATA_2018};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    /// Collapse rate λ (1/s).
    pub lambda_rate: f64,
    /// Correlation length r_C (m).
    pub r_c: f64,
    /// Colored-noise cutoff E_c = ħΩ (keV); `None` is the Markovian model.
    pub e_cutoff: Option<f64>,
}

impl CslParams {
    pub fn markovian(lambda_rate: f64, r_c: f64) -> Result<Self> {
        CslParams { lambda_rate, r_c, e_cutoff: None }.validated()
    }

    pub fn colored(lambda_rate: f64, r_c: f64, e_cutoff: f64) -> Result<Self> {
        CslParams { lambda_rate, r_c, e_cutoff: Some(e_cutoff) }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        ensure_nonnegative("lambda", self.lambda_rate)?;
        ensure_positive("r_c", self.r_c)?;
        if let Some(ec) = self.e_cutoff {
            ensure_positive("e_cutoff", ec)?;
        }
        Ok(self)
    }

    /// `ħe²λ / (12π²ε₀c³m₀²r_C²)` in 1/s; the general rate is this over E (keV)
    /// times the structure factor.
    pub fn prefactor(&self) -> f64 {
        let k = CODATA_2018;
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        k.hbar * k.e_charge * k.e_charge * self.lambda_rate
            / (12.0 * pi2 * k.epsilon0 * k.c.powi(3) * k.m0_nucleon * k.m0_nucleon * self.r_c * self.r_c)
    }
}

/// Lorentzian filter `E_c² / (E_c² + E²)` of an exponentially correlated noise.
pub fn colored_filter(energy: Energy, e_cutoff: f64) -> Result<f64> {
    ensure_positive("e_cutoff", e_cutoff)?;
    Ok(colored_filter_unchecked(energy.kev(), e_cutoff))
}

#[inline]
pub(crate) fn colored_filter_unchecked(e_kev: f64, e_cutoff: f64) -> f64 {
    let ec2 = e_cutoff * e_cutoff;
    ec2 / (ec2 + e_kev * e_kev)
}

#[inline]
pub(crate) fn apply_cutoff(white: f64, energy: Energy, e_cutoff: Option<f64>) -> f64 {
    match e_cutoff {
        Some(ec) => white * colored_filter_unchecked(energy.kev(), ec),
        None => white,
    }
}

/// Point-like CSL kernel `(m_i m_j / 2r_C²) e^{-d²/4r_C²} (3 − d²/2r_C²)`.
pub fn csl_f_ij_pointlike(distance: f64, r_c: f64, m_i: f64, m_j: f64) -> Result<f64> {
    ensure_nonnegative("distance", distance)?;
    ensure_positive("r_c", r_c)?;
    Ok(m_i * m_j * csl_kernel(distance, r_c))
}

/// Mass-free kernel `e^{-d²/4r_C²}(3 − d²/2r_C²) / (2r_C²)`.
#[inline]
fn csl_kernel(distance: f64, r_c: f64) -> f64 {
    csl_pair_weight(distance, r_c) / (2.0 * r_c * r_c)
}

/// `e^{-d²/4r_C²}(3 − d²/2r_C²)`, the weight of one pair in `S_CSL`.
#[inline]
pub(crate) fn csl_pair_weight(distance: f64, r_c: f64) -> f64 {
    let u = distance * distance / (r_c * r_c);
    (-0.25 * u).exp() * (3.0 - 0.5 * u)
}

/// Extended kernel value with the quadrature's estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedKernel {
    pub value: f64,
    pub rel_error: f64,
}

/// Requested relative accuracy of [`csl_f_ij_extended`].
pub const EXTENDED_REL_TOL: f64 = 1e-8;

/// CSL kernel for two spherical Gaussian mass densities
/// `μ(s) = m (2πw²)^{-3/2} e^{-s²/2w²}` whose centres are `distance` apart.
///
/// The two densities convolve into one Gaussian of variance `w_i² + w_j²`;
/// its angular average around the separation vector is done analytically,
/// leaving a radial integral evaluated by adaptive Gauss–Kronrod.
pub fn csl_f_ij_extended(
    width_i: f64,
    width_j: f64,
    distance: f64,
    r_c: f64,
    m_i: f64,
    m_j: f64,
) -> Result<ExtendedKernel> {
    ensure_nonnegative("width_i", width_i)?;
    ensure_nonnegative("width_j", width_j)?;
    ensure_nonnegative("distance", distance)?;
    ensure_positive("r_c", r_c)?;
    if !(m_i.is_finite() && m_j.is_finite()) {
        return Err(Error::NonFinite("mass"));
    }
    let s2 = width_i * width_i + width_j * width_j;
    if s2 == 0.0 {
        return Ok(ExtendedKernel { value: m_i * m_j * csl_kernel(distance, r_c), rel_error: 0.0 });
    }
    if m_i == 0.0 || m_j == 0.0 {
        return Ok(ExtendedKernel { value: 0.0, rel_error: 0.0 });
    }
    let s = s2.sqrt();
    let d = distance;
    // ∫d³r G_s(r − d) K(|r|) = 4π ∫ r² K(r) ⟨G_s⟩_Ω dr with
    // ⟨G_s⟩_Ω = (2πs²)^{-3/2} e^{-(r−d)²/2s²} (1 − e^{-2x})/(2x), x = rd/s².
    let norm = (2.0 * std::f64::consts::PI * s2).powf(-1.5) * 4.0 * std::f64::consts::PI;
    let integrand = |r: f64| {
        let x = r * d / s2;
        let shell_avg = if x < 1e-300 { 1.0 } else { -(-2.0 * x).exp_m1() / (2.0 * x) };
        let g = (-(r - d) * (r - d) / (2.0 * s2)).exp();
        r * r * csl_kernel(r, r_c) * g * shell_avg
    };
    let reach = 40.0 * s;
    let lo = (d - reach).max(0.0);
    let hi = d + reach;
    let abs_tol = 1e-16 * 3.0 / (2.0 * r_c * r_c) / norm;
    // split at the density peak so both halves start out resolved
    let mut total = 0.0;
    let mut err = 0.0;
    let mut pieces = vec![lo];
    if d > lo {
        pieces.push(d);
    }
    pieces.push(hi);
    for w in pieces.windows(2) {
        let part = quadrature::integrate(integrand, w[0], w[1], EXTENDED_REL_TOL * 1e-2, abs_tol, 4000)?;
        total += part.value;
        err += part.abs_error;
    }
    let rel_error = if total == 0.0 { err } else { err / total.abs() };
    if rel_error > EXTENDED_REL_TOL {
        return Err(Error::Quadrature { achieved: rel_error, requested: EXTENDED_REL_TOL });
    }
    Ok(ExtendedKernel { value: m_i * m_j * norm * total, rel_error })
}

pub(crate) fn csl_structure_from_terms(terms: &[PairTerm], energy: Energy, r_c: f64) -> f64 {
    terms
        .iter()
        .map(|t| {
            let phase = photon_argument_unchecked(t.distance, energy);
            t.kind.charge_sign() * t.multiplicity as f64 * sinc_unchecked(phase) * csl_pair_weight(t.distance, r_c)
        })
        .sum()
}

/// The braces of the general CSL rate: `3N_p² + 3N_e` plus the interfering
/// proton–electron, same-shell and cross-shell terms.
pub fn csl_structure_factor(atom: &Atom, energy: Energy, r_c: f64, geom: &PairGeometry) -> Result<f64> {
    ensure_positive("r_c", r_c)?;
    Ok(csl_structure_from_terms(&enumerate_pairs(atom, geom), energy, r_c))
}

/// General CSL rate per atom, 1/(s·keV).
pub fn csl_rate_general(atom: &Atom, energy: Energy, params: &CslParams, geom: &PairGeometry) -> Result<f64> {
    let params = params.validated()?;
    let structure = csl_structure_factor(atom, energy, params.r_c, geom)?;
    let white = params.prefactor() / energy.kev() * structure;
    Ok(apply_cutoff(white, energy, params.e_cutoff))
}

/// High-energy CSL rate `ħe²λ(N_p² + N_e) / (4π²ε₀c³r_C²m₀²E)`, 1/(s·keV).
pub fn csl_rate_simple(atom: &Atom, energy: Energy, params: &CslParams) -> Result<f64> {
    let params = params.validated()?;
    let n_p = f64::from(atom.n_protons());
    let n_e = f64::from(atom.n_electrons());
    let white = params.prefactor() / energy.kev() * (3.0 * (n_p * n_p + n_e));
    Ok(apply_cutoff(white, energy, params.e_cutoff))
}

/// Long-wavelength CSL rate `ħe²λ(N_p − N_e)² / (4π²ε₀c³m₀²r_C²E)`, which is
/// zero for neutral atoms.
pub fn csl_rate_longwave(atom: &Atom, energy: Energy, params: &CslParams) -> Result<f64> {
    let params = params.validated()?;
    let charge = f64::from(atom.n_protons()) - f64::from(atom.n_electrons());
    let white = params.prefactor() / energy.kev() * (3.0 * charge * charge);
    Ok(apply_cutoff(white, energy, params.e_cutoff))
}
