//! Physical constants (CODATA 2018) and the scalar helpers shared by the rate
//! formulas.
//!
//! Every formula runs in SI units. keV enters only through [`Energy`] and is
//! converted once with [`PhysicalConstants::kev_in_joule`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Speed of light in vacuum (m/s).
    pub c: f64,
    /// Vacuum permittivity (F/m).
    pub epsilon0: f64,
    /// Elementary charge (C).
    pub e_charge: f64,
    /// Reference nucleon mass m₀ (kg), the atomic mass constant.
    pub m0_nucleon: f64,
    /// Newtonian constant of gravitation (m³/(kg·s²)).
    pub g_newton: f64,
    /// One keV in joules.
    pub kev_in_joule: f64,
    /// Bohr radius (m), used by the shipped radius estimates.
    pub bohr_radius: f64,
}

/// CODATA 2018 recommended values (Tiesinga et al., Rev. Mod. Phys. 93, 025010).
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 299_792_458.0,
    epsilon0: 8.854_187_812_8e-12,
    e_charge: 1.602_176_634e-19,
    m0_nucleon: 1.660_539_066_60e-27,
    g_newton: 6.674_30e-11,
    kev_in_joule: 1.602_176_634e-16,
    bohr_radius: 5.291_772_109_03e-11,
};

impl PhysicalConstants {
    /// ħc in J·m.
    pub fn hbar_c(&self) -> f64 {
        self.hbar * self.c
    }

    /// ħc in keV·m.
    pub fn hbar_c_kev_m(&self) -> f64 {
        self.hbar * self.c / self.kev_in_joule
    }
}

/// Below this photon energy the semiclassical rates are outside their stated
/// range of validity. They are still evaluated; callers flag the result.
pub const VALIDITY_FLOOR_KEV: f64 = 1.0;

/// Photon energy in keV. Always strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Energy(f64);

impl Energy {
    pub fn from_kev(kev: f64) -> Result<Self> {
        if !kev.is_finite() {
            return Err(Error::NonFinite("energy"));
        }
        if kev <= 0.0 {
            return Err(Error::NonPositiveEnergy(kev));
        }
        Ok(Energy(kev))
    }

    pub fn kev(self) -> f64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 * CODATA_2018.kev_in_joule
    }

    /// True when the energy lies below [`VALIDITY_FLOOR_KEV`].
    pub fn below_validity_floor(self) -> bool {
        self.0 < VALIDITY_FLOOR_KEV
    }
}

impl TryFrom<f64> for Energy {
    type Error = Error;

    fn try_from(kev: f64) -> Result<Self> {
        Energy::from_kev(kev)
    }
}

impl From<Energy> for f64 {
    fn from(e: Energy) -> f64 {
        e.0
    }
}

const SINC_TAYLOR_THRESHOLD: f64 = 1e-4;

/// sin(x)/x, with the quartic Taylor expansion for |x| < 1e-4.
pub fn sinc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("sinc argument"));
    }
    Ok(sinc_unchecked(x))
}

#[inline]
pub(crate) fn sinc_unchecked(x: f64) -> f64 {
    if x.abs() < SINC_TAYLOR_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Phase `d·E/(ħc)` of a photon of energy `energy` across a separation
/// `distance` (m). Equals 2π·d/λ_γ.
pub fn photon_argument(distance: f64, energy: Energy) -> Result<f64> {
    if !distance.is_finite() {
        return Err(Error::NonFinite("distance"));
    }
    if distance < 0.0 {
        return Err(Error::param("distance", "non-negative", distance));
    }
    Ok(photon_argument_unchecked(distance, energy))
}

#[inline]
pub(crate) fn photon_argument_unchecked(distance: f64, energy: Energy) -> f64 {
    distance * energy.joules() / CODATA_2018.hbar_c()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants_positive_and_codata() {
        let k = CODATA_2018;
        for v in [k.hbar, k.c, k.epsilon0, k.e_charge, k.m0_nucleon, k.g_newton, k.kev_in_joule, k.bohr_radius] {
            assert!(v > 0.0 && v.is_finite());
        }
        // ħc = 197.3269804 MeV·fm (CODATA 2018)
        let hbar_c_mev_fm = k.hbar_c() / (1e3 * k.kev_in_joule) / 1e-15;
        assert!((hbar_c_mev_fm - 197.326_980_4).abs() < 1e-6);
        // ε₀ from μ₀ = 1.25663706212e-6 N/A²
        let eps0 = 1.0 / (1.256_637_062_12e-6 * k.c * k.c);
        assert!((eps0 / k.epsilon0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sinc_examples() {
        assert_eq!(sinc(0.0).unwrap(), 1.0);
        assert!(sinc(std::f64::consts::PI).unwrap().abs() < 1e-15);
        let direct = 0.5f64.sin() / 0.5;
        // 0.958851077208406 from a 30-digit evaluation
        assert!((sinc(0.5).unwrap() - 0.958_851_077_208_406).abs() < 1e-15);
        assert!((sinc(0.5).unwrap() / direct - 1.0).abs() < 1e-15);
        assert!(sinc(f64::NAN).is_err());
        assert!(sinc(f64::INFINITY).is_err());
    }

    #[test]
    fn sinc_continuous_at_threshold() {
        let t = SINC_TAYLOR_THRESHOLD;
        let eps = 1e-12;
        let below = sinc(t - eps).unwrap();
        let above = sinc(t + eps).unwrap();
        assert!((below - above).abs() < 1e-14);
    }

    #[test]
    fn photon_argument_examples() {
        let e1 = Energy::from_kev(1.0).unwrap();
        assert_eq!(photon_argument(0.0, e1).unwrap(), 0.0);
        let d = CODATA_2018.hbar_c() / e1.joules();
        assert!((photon_argument(d, e1).unwrap() - 1.0).abs() < 1e-14);
        // ħc = 1.973269804 keV·Å, so 1 Å at 12.398 keV is 12.398/1.973269804 rad
        let e = Energy::from_kev(12.398).unwrap();
        let expected = 12.398 / 1.973_269_804;
        assert!((photon_argument(1e-10, e).unwrap() / expected - 1.0).abs() < 1e-9);
        assert!(photon_argument(-1e-10, e).is_err());
    }

    #[test]
    fn energy_rejects_nonpositive() {
        assert!(Energy::from_kev(0.0).is_err());
        assert!(Energy::from_kev(-3.0).is_err());
        assert!(Energy::from_kev(f64::NAN).is_err());
        assert!(Energy::from_kev(0.5).unwrap().below_validity_floor());
        assert!(!Energy::from_kev(1.0).unwrap().below_validity_floor());
    }

    proptest! {
        #[test]
        fn sinc_even_and_bounded(x in -1e4f64..1e4) {
            let a = sinc(x).unwrap();
            prop_assert_eq!(a, sinc(-x).unwrap());
            prop_assert!(a.abs() <= 1.0);
        }

        #[test]
        fn photon_argument_linear(d in 0.0f64..1e-8, e in 1e-3f64..1e4, k in 0.1f64..10.0) {
            let base = photon_argument(d, Energy::from_kev(e).unwrap()).unwrap();
            let scaled_d = photon_argument(k * d, Energy::from_kev(e).unwrap()).unwrap();
            let scaled_e = photon_argument(d, Energy::from_kev(k * e).unwrap()).unwrap();
            prop_assert!((scaled_d - k * base).abs() <= 1e-12 * (k * base).abs().max(1e-300));
            prop_assert!((scaled_e - k * base).abs() <= 1e-12 * (k * base).abs().max(1e-300));
        }
    }
}
