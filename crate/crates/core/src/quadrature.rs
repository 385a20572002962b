//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.
//!
//! Used by the numerical `f_ij` oracles; not on any hot path.

use crate::error::{Error, Result};

// Kronrod 15-point abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    pub intervals: usize,
}

impl Integral {
    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error
        } else {
            self.abs_error / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrate `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol·|I|)`. Fails with [`Error::Quadrature`] when
/// `max_intervals` bisections do not reach the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("integration bounds"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0, intervals: 0 });
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonFinite("integrand"));
        }
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Integral { value, abs_error: error, intervals: segments.len() });
        }
        if segments.len() >= max_intervals {
            let achieved = if value == 0.0 { error } else { error / value.abs() };
            return Err(Error::Quadrature { achieved, requested: rel_tol });
        }
        let (worst, _) =
            segments.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0, 10).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-12, 0.0, 200).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x: f64| (50.0 * x).sin(), 0.0, 1.0, 1e-10, 1e-14, 500).unwrap();
        let exact = (1.0 - 50f64.cos()) / 50.0;
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn reports_nonconvergence() {
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, 1e-14, 0.0, 4).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
