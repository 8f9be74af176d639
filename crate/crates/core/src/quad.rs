//! Adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals.

use crate::{Error, Result};

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

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Kronrod estimate, |Kronrod - Gauss| and the Kronrod estimate of the
/// integral of |f| on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (l, r) = (f(c - dx), f(c + dx));
        k += WGK[j] * (l + r);
        kabs += WGK[j] * (l.abs() + r.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (l + r);
        }
    }
    (k * h, ((k - g) * h).abs(), kabs * h.abs())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Integrates `f` over `[a, b]` by global adaptive bisection until the
/// summed error estimate is below `max(abs_tol, rel_tol |I|)`, or below the
/// rounding floor `1e-14 int |f|` when the integral itself cancels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], abs_tol, rel_tol)
}

/// As [`integrate`], starting from the given sorted breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    const MAX_INTERVALS: usize = 20_000;
    let mut intervals: Vec<(f64, f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e, m) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e, m)
        })
        .collect();
    loop {
        let value: f64 = intervals.iter().map(|i| i.2).sum();
        let error: f64 = intervals.iter().map(|i| i.3).sum();
        let magnitude: f64 = intervals.iter().map(|i| i.4).sum();
        let evaluations = 15 * intervals.len();
        if error <= abs_tol.max(rel_tol * value.abs()).max(1e-14 * magnitude) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (a, b, _, _, _) = intervals[worst];
        let m = 0.5 * (a + b);
        if intervals.len() >= MAX_INTERVALS || m <= a || m >= b {
            return Err(Error::Quadrature {
                a: breaks[0],
                b: breaks[breaks.len() - 1],
                estimate: error,
            });
        }
        let (vl, el, ml) = gk15(&f, a, m);
        let (vr, er, mr) = gk15(&f, m, b);
        intervals[worst] = (a, m, vl, el, ml);
        intervals.push((m, b, vr, er, mr));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 4.0, epsilon = 1e-13);
    }

    #[test]
    fn gaussian() {
        let r = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-15, 1e-14).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn sharp_peak() {
        // Lorentzian of width 1e-3
        let w = 1e-3;
        let r = integrate(|x: f64| w / (x * x + w * w), -1.0, 1.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(r.value, 2.0 * (1.0 / w).atan(), epsilon = 1e-11);
    }
}
