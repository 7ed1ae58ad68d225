//! Frobenius series at the regular singular points ρ = 0 and ρ = 1.
//!
//! Multiplying the mode equation by `ρ²(1-ρ²)(1+ρ²)²` (and by `t = 1-ρ` at
//! the right end) puts it in the form `x² P₂ u'' + x P₁ u' + P₀ u = 0` with
//! polynomial `Pᵢ` in the local variable `x`. Substituting
//! `u = Σ aₖ x^{k+s}` yields the recurrence
//!
//! ```text
//! aₙ F₀(n+s) = -Σ_{j≥1} aₙ₋ⱼ Fⱼ(n-j+s),   Fⱼ(τ) = P₂ⱼ τ(τ-1) + P₁ⱼ τ + P₀ⱼ,
//! ```
//!
//! whose indicial polynomial `F₀` has roots {1, -2} at ρ = 0 and
//! {0, 1-λ} at ρ = 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};
use crate::odecore::Pencil;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 40;
/// Default validity radius around each center.
pub const DEFAULT_RADIUS: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Center {
    Zero,
    One,
}

impl Center {
    pub fn point(self) -> f64 {
        match self {
            Center::Zero => 0.0,
            Center::One => 1.0,
        }
    }

    /// Local variable `x = ρ` or `x = 1 - ρ`.
    pub fn local(self, rho: f64) -> f64 {
        match self {
            Center::Zero => rho,
            Center::One => 1.0 - rho,
        }
    }
}

/// Indicial exponents at one singular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicialData {
    pub center: Center,
    /// Exponent of the analytic branch first.
    pub exponents: [Complex64; 2],
    /// `exponents[0] - exponents[1]`.
    pub gap: Complex64,
    /// Whether the second branch may carry a logarithm.
    pub log_case: bool,
}

pub fn indices_at(center: Center, lambda: Complex64) -> IndicialData {
    match center {
        Center::Zero => IndicialData {
            center,
            exponents: [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)],
            gap: Complex64::new(3.0, 0.0),
            // The equation is even in ρ, so the odd-offset coefficient that
            // would force a logarithm in the ρ⁻² branch vanishes.
            log_case: false,
        },
        Center::One => {
            let second = 1.0 - lambda;
            let gap = -second;
            IndicialData {
                center,
                exponents: [Complex64::new(0.0, 0.0), second],
                gap,
                log_case: gap.im == 0.0 && gap.re.fract() == 0.0,
            }
        }
    }
}

/// A truncated Frobenius series `u = Σ_{k=0}^{N} aₖ x^{k+s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub center: Center,
    pub lambda: Complex64,
    /// Leading exponent `s` of the analytic branch.
    pub exponent: i32,
    pub coefficients: Vec<Complex64>,
    pub radius: f64,
    /// Relative residual of the recurrence at the last order.
    pub recurrence_residual: f64,
}

type Poly = Vec<Complex64>;

fn real_poly(c: &[f64]) -> Poly {
    c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

fn scale(a: &Poly, s: Complex64) -> Poly {
    a.iter().map(|x| x * s).collect()
}

/// `(P₂, P₁, P₀)` in the local variable of `center`.
fn local_polynomials(center: Center, pencil: &Pencil) -> (Poly, Poly, Poly) {
    let lambda = pencil.lambda();
    let spectral = lambda * (1.0 + lambda) * pencil.spectral_sign();
    // ρ as a polynomial in the local variable
    let rho = match center {
        Center::Zero => real_poly(&[0.0, 1.0]),
        Center::One => real_poly(&[1.0, -1.0]),
    };
    let rho2 = mul(&rho, &rho);
    let one_plus = add(&real_poly(&[1.0]), &rho2);
    let one_plus2 = mul(&one_plus, &one_plus);
    let one_minus = add(&real_poly(&[1.0]), &scale(&rho2, Complex64::new(-1.0, 0.0)));
    // 2(ρ⁴ - 6ρ² + 1) + σλ(1+λ) ρ² (1+ρ²)²
    let quartic = add(
        &add(&mul(&rho2, &rho2), &scale(&rho2, Complex64::new(-6.0, 0.0))),
        &real_poly(&[1.0]),
    );
    let c_poly = add(
        &scale(&quartic, Complex64::new(2.0, 0.0)),
        &scale(&mul(&rho2, &one_plus2), spectral),
    );
    // ρ(2(1-ρ²) - 2λρ²)  (the ρ-multiplied first-order coefficient)
    let b_inner = add(
        &scale(&one_minus, Complex64::new(2.0, 0.0)),
        &scale(&rho2, -2.0 * lambda),
    );
    match center {
        Center::Zero => {
            let p2 = mul(&one_plus2, &one_minus);
            let p1 = mul(&one_plus2, &b_inner);
            let p0 = scale(&c_poly, Complex64::new(-1.0, 0.0));
            (p2, p1, p0)
        }
        Center::One => {
            // 1 - ρ² = t(2 - t); multiply the equation by t.
            let two_minus_t = real_poly(&[2.0, -1.0]);
            let p2 = mul(&mul(&rho2, &one_plus2), &two_minus_t);
            let p1 = scale(
                &mul(&one_plus2, &mul(&rho, &b_inner)),
                Complex64::new(-1.0, 0.0),
            );
            let p0 = scale(
                &mul(&real_poly(&[0.0, 1.0]), &c_poly),
                Complex64::new(-1.0, 0.0),
            );
            (p2, p1, p0)
        }
    }
}

fn recurrence_factor(p2: &Poly, p1: &Poly, p0: &Poly, j: usize, tau: f64) -> Complex64 {
    let g = |p: &Poly| p.get(j).copied().unwrap_or_default();
    g(p2) * (tau * (tau - 1.0)) + g(p1) * tau + g(p0)
}

fn build(
    center: Center,
    pencil: &Pencil,
    a0: Complex64,
    exponent: i32,
    order: usize,
) -> Result<SeriesExpansion> {
    if order < 4 {
        return Err(ModeError::Domain {
            name: "order",
            value: order as f64,
            domain: "[4, inf)",
        });
    }
    let (p2, p1, p0) = local_polynomials(center, pencil);
    let deg = p2.len().max(p1.len()).max(p0.len()) - 1;
    let s = exponent as f64;
    let mut a = vec![Complex64::default(); order + 1];
    a[0] = a0;
    let mut recurrence_residual = 0.0;
    for n in 1..=order {
        let lead = recurrence_factor(&p2, &p1, &p0, 0, n as f64 + s);
        let mut rhs = Complex64::default();
        let mut magnitude = 0.0;
        for j in 1..=deg.min(n) {
            let term = a[n - j] * recurrence_factor(&p2, &p1, &p0, j, (n - j) as f64 + s);
            magnitude += term.norm();
            rhs -= term;
        }
        if lead.norm() <= 1e-12 * (1.0 + magnitude) {
            return Err(match center {
                Center::One => ModeError::LogCase {
                    lambda: pencil.lambda().re,
                },
                Center::Zero => ModeError::RecurrenceDegenerate { order: n },
            });
        }
        a[n] = rhs / lead;
        if n == order {
            let total = a[n] * lead - rhs;
            let scale = magnitude + (a[n] * lead).norm();
            recurrence_residual = if scale == 0.0 {
                0.0
            } else {
                total.norm() / scale
            };
        }
    }
    Ok(SeriesExpansion {
        center,
        lambda: pencil.lambda(),
        exponent,
        coefficients: a,
        radius: DEFAULT_RADIUS,
        recurrence_residual,
    })
}

/// Series of `φ₀`, the solution analytic at ρ = 0 with `φ₀'(0) = 2`.
pub fn series_phi0(lambda: Complex64, order: usize) -> Result<SeriesExpansion> {
    series_phi0_for(&Pencil::new(lambda), order)
}

pub fn series_phi0_for(pencil: &Pencil, order: usize) -> Result<SeriesExpansion> {
    build(Center::Zero, pencil, Complex64::new(2.0, 0.0), 1, order)
}

/// Series of `φ₁`, the solution analytic at ρ = 1 with `φ₁(1) = 1`
/// (exponent-0 branch).
///
/// Fails with [`ModeError::LogCase`] when λ is a nonpositive integer: there
/// the exponent-0 branch is the smaller root and the recurrence breaks down.
pub fn series_phi1(lambda: Complex64, order: usize) -> Result<SeriesExpansion> {
    series_phi1_for(&Pencil::new(lambda), order)
}

pub fn series_phi1_for(pencil: &Pencil, order: usize) -> Result<SeriesExpansion> {
    build(Center::One, pencil, Complex64::new(1.0, 0.0), 0, order)
}

/// The C¹ regularity ratio `φ₁'(1)/φ₁(1) = (2 - λ - λ²)/(2λ)`.
pub fn regularity_ratio(lambda: Complex64) -> Complex64 {
    (2.0 - lambda - lambda * lambda) / (2.0 * lambda)
}

impl SeriesExpansion {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Value and d/dρ at `rho`.
    pub fn eval(&self, rho: f64) -> Result<(Complex64, Complex64)> {
        self.eval_local(self.center.local(rho))
    }

    /// Value and d/dρ at local coordinate `x` (`x = ρ` or `x = 1 - ρ`).
    pub fn eval_local(&self, x: f64) -> Result<(Complex64, Complex64)> {
        self.eval_local_with_error(x).map(|(u, du, _)| (u, du))
    }

    /// Value, d/dρ and a truncation estimate from the last two terms.
    pub fn eval_local_with_error(&self, x: f64) -> Result<(Complex64, Complex64, f64)> {
        if !(0.0..=self.radius).contains(&x) {
            return Err(ModeError::OutOfRadius {
                distance: x.abs(),
                radius: self.radius,
            });
        }
        let n = self.coefficients.len();
        let mut value = Complex64::default();
        let mut deriv = Complex64::default();
        for k in (0..n).rev() {
            value = value * x + self.coefficients[k];
        }
        // d/dx Σ aₖ x^{k+s} = Σ (k+s) aₖ x^{k+s-1}
        let s = self.exponent;
        for k in (0..n).rev() {
            let kk = k as i32 + s;
            if kk == 0 {
                continue;
            }
            // terms with positive powers only (s ≥ 0)
            deriv += self.coefficients[k] * (kk as f64) * x.powi(kk - 1);
        }
        let value = value * x.powi(s);
        let tail = (self.coefficients[n - 1].norm() * x.powi((n - 1) as i32))
            .max(self.coefficients[n - 2].norm() * x.powi((n - 2) as i32))
            * x.powi(s);
        let deriv = match self.center {
            Center::Zero => deriv,
            Center::One => -deriv,
        };
        Ok((value, deriv, tail))
    }
}

/// `(u, u')` of a series at `rho`; see [`SeriesExpansion::eval`].
pub fn series_eval(series: &SeriesExpansion, rho: f64) -> Result<(Complex64, Complex64)> {
    series.eval(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odecore::{theta, theta_prime};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn indicial_exponents() {
        let d = indices_at(Center::Zero, c(0.37));
        assert_eq!(d.exponents, [c(1.0), c(-2.0)]);
        // s² + s - 2 = 0
        for e in d.exponents {
            assert_eq!(e * e + e - 2.0, c(0.0));
        }
        let d = indices_at(Center::One, c(0.5));
        assert_eq!(d.exponents, [c(0.0), c(0.5)]);
        assert!(!d.log_case);
        let d = indices_at(Center::One, c(1.0));
        assert_eq!(d.exponents, [c(0.0), c(0.0)]);
        assert_eq!(d.gap, c(0.0));
        assert!(d.log_case);
    }

    #[test]
    fn phi0_at_gauge_value_is_theta_taylor() {
        let s = series_phi0(c(1.0), 30).unwrap();
        for (k, a) in s.coefficients.iter().enumerate() {
            // θ = 2ρ Σ (-ρ²)^m
            let expect = if k % 2 == 0 {
                2.0 * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 }
            } else {
                0.0
            };
            assert!((a - c(expect)).norm() < 1e-13, "k={k}");
        }
        let (u, du) = s.eval(0.3).unwrap();
        assert!((u.re - theta(0.3)).abs() < 1e-12);
        assert!((du.re - theta_prime(0.3)).abs() < 1e-12);
        let (u, du) = s.eval(0.0).unwrap();
        assert_eq!(u, c(0.0));
        assert_eq!(du, c(2.0));
    }

    #[test]
    fn phi0_coefficients_match_exact_rational_oracle() {
        // Exact rational coefficients at λ = 3/10 from undetermined
        // coefficients applied to the unmultiplied equation.
        let oracle = [
            2.0,
            0.0,
            -1301.0 / 500.0,
            0.0,
            490_783.0 / 200_000.0,
            0.0,
            -2_731_808_363.0 / 1_080_000_000.0,
            0.0,
            23_612_364_749_383.0 / 9_504_000_000_000.0,
            0.0,
            -310_802_515_534_753_043.0 / 123_552_000_000_000_000.0,
        ];
        let s = series_phi0(c(0.3), 40).unwrap();
        for (a, e) in s.coefficients.iter().zip(oracle) {
            assert!((a - c(e)).norm() < 1e-13 * e.abs().max(1.0));
        }
        for (k, a) in s.coefficients.iter().enumerate() {
            if k % 2 == 1 {
                assert_eq!(*a, c(0.0), "odd offset {k}");
            }
        }
        assert!(s.recurrence_residual < 1e-12);
    }

    #[test]
    fn phi1_regularity_ratio() {
        let s = series_phi1(c(0.5), 40).unwrap();
        let (u, du) = s.eval(1.0).unwrap();
        assert_eq!(u, c(1.0));
        assert!((du.re - 1.25).abs() < 1e-14);
        let s = series_phi1(c(0.9), 40).unwrap();
        let (_, du) = s.eval(1.0).unwrap();
        assert!((du.re - 0.29 / 1.8).abs() < 1e-14);
        let s = series_phi1(c(1.0), 40).unwrap();
        for rho in [1.0, 0.9, 0.75, 0.6] {
            let (u, du) = s.eval(rho).unwrap();
            assert!((u.re - theta(rho)).abs() < 1e-13, "rho={rho}");
            assert!((du.re - theta_prime(rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn phi1_log_case_for_nonpositive_integers() {
        assert!(matches!(
            series_phi1(c(0.0), 10),
            Err(ModeError::LogCase { .. })
        ));
        assert!(matches!(
            series_phi1(c(-2.0), 10),
            Err(ModeError::LogCase { .. })
        ));
        assert!(series_phi1(c(2.0), 10).is_ok());
    }

    #[test]
    fn eval_rejects_points_outside_radius() {
        let s = series_phi0(c(0.5), 20).unwrap();
        assert!(matches!(s.eval(0.5), Err(ModeError::OutOfRadius { .. })));
        let s = series_phi1(c(0.5), 20).unwrap();
        assert!(s.eval(0.7).is_ok());
        assert!(s.eval(0.55).is_err());
        assert!(series_phi0(c(0.5), 3).is_err());
    }

    #[test]
    fn both_branches_at_one_are_bounded_for_lambda_in_unit_interval() {
        // exponent 1 - λ ∈ (0,1): bounded but not C¹, so boundedness alone
        // cannot select the analytic branch.
        for lam in [0.1, 0.5, 0.9] {
            let d = indices_at(Center::One, c(lam));
            let e = d.exponents[1].re;
            assert!(e > 0.0 && e < 1.0);
        }
    }
}
