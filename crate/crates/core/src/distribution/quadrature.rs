//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_SEGMENTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub segments: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]`, refining the worst segment until the summed
/// error estimate drops below `rel_tol · |value|` (or a tiny absolute floor).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            segments: 0,
        };
    }
    let (v, e) = gk15(&f, a, b);
    let mut segments = vec![(a, b, v, e)];
    loop {
        let value: f64 = segments.iter().map(|s| s.2).sum();
        let error: f64 = segments.iter().map(|s| s.3).sum();
        if error <= rel_tol * value.abs() || error <= f64::MIN_POSITIVE || segments.len() >= MAX_SEGMENTS
        {
            return Quadrature {
                value,
                error,
                segments: segments.len(),
            };
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
}

/// `∫ₐᵇ f(r) dr` for `0 < a < b`, evaluated in the variable `s = ln r`.
/// Suited to integrands spanning several decades.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Quadrature {
    integrate(
        |s| {
            let r = s.exp();
            f(r) * r
        },
        a.ln(),
        b.ln(),
        rel_tol,
    )
}

/// One fixed GK15 panel, for short subintervals where adaptivity is not
/// needed.
pub fn panel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    gk15(&f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| 3.0 * x * x - x + 1.0, -1.0, 2.0, 1e-14);
        assert!((q.value - (9.0 - 1.5 + 3.0)).abs() < 1e-13);
        assert_eq!(q.segments, 1);
    }

    #[test]
    fn smooth_integrals() {
        let q = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((q.value - 2.0).abs() < 1e-12);
        // ∫_1^1000 r^-1.5 dr = 2 (1 - 1000^-0.5)
        let q = integrate_log(|r| r.powf(-1.5), 1.0, 1000.0, 1e-12);
        let exact = 2.0 * (1.0 - 1000f64.powf(-0.5));
        assert!(((q.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn steep_integrand_converges() {
        // ∫_0^50 e^{-x} dx
        let q = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-12);
        let exact = 1.0 - (-50f64).exp();
        assert!(((q.value - exact) / exact).abs() < 1e-12);
        assert!(q.error <= 1e-12 * q.value);
    }
}
