//! Quadrature primitives: Gauss–Legendre rules, globally adaptive
//! Gauss–Kronrod integration, and a graded variant for integrable
//! algebraic endpoint singularities.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{ModeError, Result};

/// Values that can be integrated: real or complex.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
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

fn gk15<T: Scalar, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let fs = f(c - dx) + f(c + dx);
        kronrod = kronrod + fs * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + fs * WG[j / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).modulus())
}

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over [a, b].
///
/// The interval with the largest error estimate is bisected until the
/// summed estimate falls below `max(abs, rel * |I|)`.
pub fn integrate<T: Scalar, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult {
            value: T::default(),
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts: Vec<(f64, f64, T, f64)> = vec![(a, b, v, e)];
    loop {
        let total = parts.iter().fold(T::default(), |acc, p| acc + p.2);
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let target = tol.abs.max(tol.rel * total.modulus());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: parts.len(),
            });
        }
        if parts.len() >= tol.max_intervals {
            return Err(ModeError::Quadrature {
                estimate: err,
                intervals: parts.len(),
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty partition");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(ModeError::Quadrature {
                estimate: err,
                intervals: parts.len() + 1,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrates `g(t)` over `t ∈ [0, length]` where `g(t) ~ t^exponent`
/// (possibly times a logarithm) as `t → 0`, with `exponent > -1`.
///
/// The substitution `t = length * s^k` with `k (exponent + 1) >= 3` turns the
/// endpoint behavior into a C² one, after which ordinary adaptive
/// quadrature converges quickly. The integrand receives the distance `t`
/// itself so callers can avoid forming `1 - t` near a singular point.
pub fn integrate_graded<T: Scalar, F: Fn(f64) -> T>(
    g: F,
    length: f64,
    exponent: f64,
    tol: QuadTolerance,
) -> Result<QuadResult<T>> {
    if exponent <= -1.0 {
        return Err(ModeError::Domain {
            name: "exponent",
            value: exponent,
            domain: "(-1, inf)",
        });
    }
    let k = (3.0 / (exponent + 1.0)).ceil().max(1.0);
    let kk = k as i32;
    integrate(
        |s: f64| {
            if s <= 0.0 {
                return T::default();
            }
            let t = length * s.powi(kk);
            g(t) * (length * k * s.powi(kk - 1))
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn kronrod_tables_have_expected_exactness() {
        // K15 integrates degree <= 22 exactly, the embedded G7 degree <= 13.
        for deg in 0..=22 {
            let f = |x: f64| x.powi(deg);
            let (k, _) = gk15(&f, 0.0, 1.0);
            assert!((k - 1.0 / (deg as f64 + 1.0)).abs() < 1e-15, "deg={deg}");
        }
        for deg in 0..=13 {
            let f = |x: f64| x.powi(deg);
            let (k, e) = gk15(&f, 0.0, 1.0);
            assert!(e < 1e-15, "deg={deg} e={e}");
            assert!((k - 1.0 / (deg as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let r = integrate(
            |x: f64| 1.0 / (1e-4 + x * x),
            -1.0,
            1.0,
            QuadTolerance::default(),
        )
        .unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn graded_handles_algebraic_endpoint_singularity() {
        // ∫_0^1 t^{-0.9} dt = 10
        let r =
            integrate_graded(|t: f64| t.powf(-0.9), 1.0, -0.9, QuadTolerance::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-9, "{}", r.value);
        // ∫_0^1 ln t dt = -1
        let r = integrate_graded(|t: f64| t.ln(), 1.0, 0.0, QuadTolerance::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            PI,
            QuadTolerance::default(),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
