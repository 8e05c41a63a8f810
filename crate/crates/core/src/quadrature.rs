//! Globally adaptive Gauss–Kronrod (7/15 point) integration.
//!
//! Intervals are kept in a list and the one with the largest error estimate
//! is bisected until the summed error meets the tolerance. Spectra over the
//! whole frequency axis are mapped onto `[0, pi/2)` by `omega = s * tan(theta)`
//! before integration.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
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

// Gauss weights at the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kronrod += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Integrates `f` over `[a, b]`, starting from the partition given by the
/// sorted interior `breakpoints`, until the estimated error is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<Integral> {
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut segs: Vec<Segment> = edges.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let mut evaluations = 15 * segs.len();
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral { value, error, evaluations });
        }
        if segs.len() >= max_segments {
            return Err(Error::QuadratureFailed { estimate: value, error });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::QuadratureFailed { estimate: value, error });
        }
        segs.push(gk15(&mut f, s.a, mid));
        segs.push(gk15(&mut f, mid, s.b));
        evaluations += 30;
    }
}

/// Integrates an even, integrable function over the whole real line,
/// returning `(1 / 2pi) * integral`. `scale` sets the compactification
/// `omega = scale * tan(theta)`; the initial partition puts breakpoints at
/// every half decade of `omega / scale` between 1e-12 and 1e4.
pub fn integrate_even_over_line<F: FnMut(f64) -> f64>(mut f: F, scale: f64, rel_tol: f64) -> Result<Integral> {
    let breaks: Vec<f64> = (-24..=8).map(|k| (10f64.powf(k as f64 / 2.0)).atan()).collect();
    let g = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            return 0.0;
        }
        f(scale * theta.tan()) * scale / (c * c)
    };
    let half = integrate(g, 0.0, std::f64::consts::FRAC_PI_2, &breaks, rel_tol, 0.0, 20_000)?;
    Ok(Integral {
        value: half.value / std::f64::consts::PI,
        error: half.error / std::f64::consts::PI,
        evaluations: half.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &[], 1e-14, 0.0, 10).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn lorentzian_over_line() {
        // (1/2pi) * int 2g / (w^2 + g^2) dw = 1 for any width g
        for g in [1e-6, 1e-2, 1.0, 1e3] {
            let r = integrate_even_over_line(|w| 2.0 * g / (w * w + g * g), 1.0, 1e-10).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9, "g = {g}: {}", r.value);
        }
    }

    #[test]
    fn narrow_resonance() {
        // Two poles at +-w0 with width g: a relaxation-oscillation shape.
        let (w0, g) = (50.0_f64, 0.3_f64);
        let f = |w: f64| {
            let d = (w0 * w0 - w * w).powi(2) + (g * w).powi(2);
            1.0 / d
        };
        // int dw / ((w0^2 - w^2)^2 + g^2 w^2) = pi / (g w0^2)
        let r = integrate_even_over_line(f, 1.0, 1e-10).unwrap();
        let exact = 1.0 / (2.0 * g * w0 * w0);
        assert!((r.value - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.value);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x| 1.0 / x.abs().sqrt(), -1.0, 1.0, &[], 1e-15, 0.0, 8);
        assert!(matches!(r, Err(Error::QuadratureFailed { .. })));
    }
}
