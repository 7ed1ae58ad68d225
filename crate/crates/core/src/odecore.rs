//! Closed-form background quantities and the coefficients of the mode
//! equation around the self-similar wave map `f0(ρ) = 2 arctan ρ`.
//!
//! Mode solutions `w = e^{λτ} u(ρ)` of the linearized evolution satisfy
//!
//! ```text
//! u'' + p(ρ,λ) u' - r(ρ,λ) u = 0,
//! p = 2/ρ - 2λρ/(1-ρ²),
//! r = 2 cos(2 f0)/(ρ²(1-ρ²)) + λ(1+λ)/(1-ρ²),
//! ```
//!
//! with regular singular points at ρ = 0 and ρ = 1. Everything here is a
//! pure function of its arguments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};
use crate::quad::{integrate, QuadTolerance};

/// Default base point of the second kernel `ψ`.
pub const PSI_BASE_POINT: f64 = 0.5;

fn check_closed_unit(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(ModeError::Domain {
            name: "rho",
            value: rho,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

fn check_open_unit(rho: f64) -> Result<()> {
    check_closed_unit(rho)?;
    if rho == 0.0 || rho == 1.0 {
        return Err(ModeError::SingularPoint { rho });
    }
    Ok(())
}

/// The blow-up profile `f0(ρ) = 2 arctan ρ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BackgroundProfile;

impl BackgroundProfile {
    pub fn f0(self, rho: f64) -> f64 {
        2.0 * rho.atan()
    }

    /// `cos(2 f0) = (ρ⁴ - 6ρ² + 1)/(1 + ρ²)²`.
    pub fn cos_2f0(self, rho: f64) -> f64 {
        let r2 = rho * rho;
        (r2 * r2 - 6.0 * r2 + 1.0) / ((1.0 + r2) * (1.0 + r2))
    }

    /// Trigonometric evaluation of `cos(2 f0)`; reference only.
    pub fn cos_2f0_trig(self, rho: f64) -> f64 {
        (2.0 * self.f0(rho)).cos()
    }

    /// `cos f0 = (1 - ρ²)/(1 + ρ²)`.
    pub fn cos_f0(self, rho: f64) -> f64 {
        (1.0 - rho * rho) / (1.0 + rho * rho)
    }

    /// `sin f0 = 2ρ/(1 + ρ²)`.
    pub fn sin_f0(self, rho: f64) -> f64 {
        2.0 * rho / (1.0 + rho * rho)
    }
}

/// `(f0(ρ), cos 2f0(ρ))` for ρ ∈ [0, 1].
pub fn eval_background(rho: f64) -> Result<(f64, f64)> {
    check_closed_unit(rho)?;
    let bg = BackgroundProfile;
    Ok((bg.f0(rho), bg.cos_2f0(rho)))
}

/// Deliberate coefficient corruption used as a negative control for the
/// certificate layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientFault {
    /// Flips the sign of the `λ(1+λ)/(1-ρ²)` term of `r`.
    FlipSpectralTerm,
}

/// Coefficients `p` and `r` of the mode equation for a fixed λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pencil {
    lambda: Complex64,
    spectral_sign: f64,
}

impl Pencil {
    pub fn new(lambda: Complex64) -> Self {
        Self {
            lambda,
            spectral_sign: 1.0,
        }
    }

    pub fn real(lambda: f64) -> Self {
        Self::new(Complex64::new(lambda, 0.0))
    }

    pub fn with_fault(lambda: Complex64, fault: Option<CoefficientFault>) -> Self {
        let spectral_sign = match fault {
            None => 1.0,
            Some(CoefficientFault::FlipSpectralTerm) => -1.0,
        };
        Self {
            lambda,
            spectral_sign,
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn is_faulted(&self) -> bool {
        self.spectral_sign != 1.0
    }

    /// Multiplier of the `λ(1+λ)` term (1 unless faulted).
    pub fn spectral_sign(&self) -> f64 {
        self.spectral_sign
    }

    /// `p(ρ,λ) = 2/ρ - 2λρ/(1-ρ²)`.
    pub fn first_order(&self, rho: f64) -> Complex64 {
        Complex64::new(2.0 / rho, 0.0) - self.lambda * (2.0 * rho / (1.0 - rho * rho))
    }

    /// `r(ρ,λ) = 2 cos 2f0/(ρ²(1-ρ²)) + λ(1+λ)/(1-ρ²)`.
    pub fn zeroth_order(&self, rho: f64) -> Complex64 {
        let one_minus = 1.0 - rho * rho;
        let potential = 2.0 * BackgroundProfile.cos_2f0(rho) / (rho * rho * one_minus);
        let l = self.lambda;
        Complex64::new(potential, 0.0) + l * (1.0 + l) * (self.spectral_sign / one_minus)
    }

    /// `u'' = -p u' + r u`, without domain checks (hot path of the integrator).
    #[inline]
    pub fn rhs(&self, rho: f64, u: Complex64, du: Complex64) -> Complex64 {
        -self.first_order(rho) * du + self.zeroth_order(rho) * u
    }

    pub fn second_derivative(&self, rho: f64, u: Complex64, du: Complex64) -> Result<Complex64> {
        check_open_unit(rho)?;
        Ok(self.rhs(rho, u, du))
    }
}

/// The mode equation solved for `u''` at an interior point.
pub fn pencil_second_derivative(
    rho: f64,
    lambda: Complex64,
    u: Complex64,
    du: Complex64,
) -> Result<Complex64> {
    Pencil::new(lambda).second_derivative(rho, u, du)
}

/// `ũ = ρ(1-ρ²)^{λ/2} u` and its derivative.
pub fn sl_transform(
    u: Complex64,
    du: Complex64,
    rho: f64,
    lambda: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_open_unit(rho)?;
    let (m, dm) = sl_factor(rho, lambda);
    Ok((m * u, dm * u + m * du))
}

/// Inverse of [`sl_transform`].
pub fn sl_inverse(
    ut: Complex64,
    dut: Complex64,
    rho: f64,
    lambda: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_open_unit(rho)?;
    let (m, dm) = sl_factor(rho, lambda);
    let u = ut / m;
    Ok((u, (dut - dm * u) / m))
}

/// `m = ρ(1-ρ²)^{λ/2}` and `m'`.
pub(crate) fn sl_factor(rho: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let one_minus = 1.0 - rho * rho;
    let pow = (lambda * (0.5 * one_minus.ln())).exp();
    let m = pow * rho;
    let dm = pow * (1.0 - lambda * (rho * rho / one_minus));
    (m, dm)
}

/// `m''` for `m = ρ(1-ρ²)^{λ/2}`.
pub(crate) fn sl_factor_second(rho: f64, lambda: Complex64) -> Complex64 {
    let one_minus = 1.0 - rho * rho;
    let pow = (lambda * (0.5 * one_minus.ln())).exp();
    // m = ρ g, g = (1-ρ²)^{λ/2}, g' = -λρ g/(1-ρ²)
    // g'' = g [λ²ρ²/(1-ρ²)² - λ/(1-ρ²) - 2λρ²/(1-ρ²)²]
    let g1 = -lambda * rho / one_minus;
    let g2 = lambda * lambda * (rho * rho / (one_minus * one_minus))
        - lambda / one_minus
        - lambda * (2.0 * rho * rho / (one_minus * one_minus));
    pow * (g1 * 2.0 + g2 * rho)
}

/// Potential `V` of the transformed equation `ũ'' - V ũ = 0`.
pub fn sl_potential(rho: f64, lambda: Complex64) -> Result<Complex64> {
    check_open_unit(rho)?;
    let one_minus = 1.0 - rho * rho;
    let potential = 2.0 * BackgroundProfile.cos_2f0(rho) / (rho * rho * one_minus);
    Ok(Complex64::new(potential, 0.0) - lambda * (2.0 - lambda) / (one_minus * one_minus))
}

/// `p_λ(ρ) = -λ(2-λ)/(1-ρ²)²`, the spectral part of the transformed equation.
pub fn sl_spectral_part(rho: f64, lambda: f64) -> f64 {
    let one_minus = 1.0 - rho * rho;
    -lambda * (2.0 - lambda) / (one_minus * one_minus)
}

/// Gauge mode `θ = 2ρ/(1+ρ²)`.
pub fn theta(rho: f64) -> f64 {
    2.0 * rho / (1.0 + rho * rho)
}

pub fn theta_prime(rho: f64) -> f64 {
    let d = 1.0 + rho * rho;
    2.0 * (1.0 - rho * rho) / (d * d)
}

pub fn theta_second(rho: f64) -> f64 {
    let d = 1.0 + rho * rho;
    4.0 * rho * (rho * rho - 3.0) / (d * d * d)
}

/// Second solution of the λ = 1 equation,
/// `χ = (ρ⁻² + 6ρ log((1-ρ)/(1+ρ)) + 9)/(1+ρ²)`.
pub fn chi(rho: f64) -> f64 {
    let g = 1.0 / (rho * rho) - 12.0 * rho * rho.atanh() + 9.0;
    g / (1.0 + rho * rho)
}

pub fn chi_prime(rho: f64) -> f64 {
    let r2 = rho * rho;
    let g = 1.0 / r2 - 12.0 * rho * rho.atanh() + 9.0;
    let dg = -2.0 / (r2 * rho) - 12.0 * rho.atanh() - 12.0 * rho / (1.0 - r2);
    let d = 1.0 + r2;
    dg / d - 2.0 * rho * g / (d * d)
}

pub fn chi_second(rho: f64) -> f64 {
    let r2 = rho * rho;
    let one_minus = 1.0 - r2;
    let g = 1.0 / r2 - 12.0 * rho * rho.atanh() + 9.0;
    let dg = -2.0 / (r2 * rho) - 12.0 * rho.atanh() - 12.0 * rho / one_minus;
    let d2g = 6.0 / (r2 * r2) - 12.0 / one_minus - 12.0 * (1.0 + r2) / (one_minus * one_minus);
    let d = 1.0 + r2;
    d2g / d - 4.0 * rho * dg / (d * d) + g * (6.0 * r2 - 2.0) / (d * d * d)
}

/// Residual of the mode equation relative to the size of its terms:
/// `|u'' + p u' - r u| / (|u''| + |p u'| + |r u|)`.
pub fn relative_residual(
    pencil: &Pencil,
    rho: f64,
    u: Complex64,
    du: Complex64,
    d2u: Complex64,
) -> f64 {
    let a = pencil.first_order(rho) * du;
    let b = pencil.zeroth_order(rho) * u;
    let scale = d2u.norm() + a.norm() + b.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (d2u + a - b).norm() / scale
}

/// `W(θ, χ) = θχ' - θ'χ = -6/(ρ²(1-ρ²))`.
pub fn wronskian_theta_chi(rho: f64) -> f64 {
    -6.0 / (rho * rho * (1.0 - rho * rho))
}

/// The fundamental system `{θ, χ}` of the λ = 1 equation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousBasis {
    pub theta: f64,
    pub theta_prime: f64,
    pub chi: f64,
    pub chi_prime: f64,
    pub wronskian: f64,
}

impl HomogeneousBasis {
    pub fn at(rho: f64) -> Result<Self> {
        check_open_unit(rho)?;
        Ok(Self {
            theta: theta(rho),
            theta_prime: theta_prime(rho),
            chi: chi(rho),
            chi_prime: chi_prime(rho),
            wronskian: wronskian_theta_chi(rho),
        })
    }
}

/// `Q_λ u = [2(λ-1)ρ u' + (λ(1+λ) - 2) u]/(1-ρ²)`.
pub fn q_operator(rho: f64, lambda: Complex64, u: Complex64, du: Complex64) -> Result<Complex64> {
    check_open_unit(rho)?;
    Ok(q_operator_unchecked(rho, lambda, u, du))
}

#[inline]
pub(crate) fn q_operator_unchecked(
    rho: f64,
    lambda: Complex64,
    u: Complex64,
    du: Complex64,
) -> Complex64 {
    ((lambda - 1.0) * (2.0 * rho) * du + (lambda * (1.0 + lambda) - 2.0) * u) / (1.0 - rho * rho)
}

/// `ψ'(ρ,λ) = 1/(ρ²(1-ρ²)^λ)`.
pub fn psi_prime(rho: f64, lambda: Complex64) -> Complex64 {
    let one_minus = 1.0 - rho * rho;
    (-lambda * one_minus.ln()).exp() / (rho * rho)
}

/// `ψ'` at `ρ = 1 - t`, accurate for tiny `t`.
pub fn psi_prime_from_one(t: f64, lambda: Complex64) -> Complex64 {
    let rho = 1.0 - t;
    let one_minus = t * (2.0 - t);
    (-lambda * one_minus.ln()).exp() / (rho * rho)
}

/// `ψ(ρ,λ;c) = ∫_c^ρ ψ'(ξ) dξ` by adaptive quadrature, together with `ψ'(ρ)`.
pub fn psi_eval(rho: f64, lambda: Complex64, c: f64) -> Result<(Complex64, Complex64)> {
    check_open_unit(rho)?;
    check_open_unit(c)?;
    let value = integrate(|x| psi_prime(x, lambda), c, rho, QuadTolerance::default())?.value;
    Ok((value, psi_prime(rho, lambda)))
}

/// Coefficient `q(ρ,λ) = λ(1+λ)/(1-ρ²) + 2 cos 2f0/(ρ²(1-ρ²))` of the
/// split used near ρ = 1 (equal to `r`).
pub fn q_coefficient(rho: f64, lambda: Complex64) -> Complex64 {
    Pencil::new(lambda).zeroth_order(rho)
}

/// `q(ρ)/ψ'(ρ)` at `ρ = 1 - t` divided by `t^{λ-1}`:
/// `(2-t)^{λ-1} [σλ(1+λ)(1-t)² + 2 cos 2f0(1-t)]`, smooth at `t = 0`.
/// `σ` is the pencil's spectral sign.
pub(crate) fn q_over_psi_prime_regular(t: f64, pencil: &Pencil) -> Complex64 {
    let lambda = pencil.lambda();
    let rho = 1.0 - t;
    let bracket = lambda * (1.0 + lambda) * (pencil.spectral_sign() * rho * rho)
        + 2.0 * BackgroundProfile.cos_2f0(rho);
    ((lambda - 1.0) * (2.0 - t).ln()).exp() * bracket
}

/// Which form of the `cos` factor to use in `β_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaForm {
    /// `cos(2 f0)`, consistent with the mode equation.
    DoubleAngle,
    /// `cos(f0)`, as literally printed in the proof.
    Literal,
}

/// `β_λ(ρ) = λ(1+λ)/(1-ρ²) + 2 cos(2f0)/(ρ²(1-ρ²))`, the zeroth-order
/// coefficient of the mode equation for real λ.
pub fn beta(rho: f64, lambda: f64) -> f64 {
    beta_with_form(rho, lambda, BetaForm::DoubleAngle)
}

pub fn beta_with_form(rho: f64, lambda: f64, form: BetaForm) -> f64 {
    let bg = BackgroundProfile;
    let c = match form {
        BetaForm::DoubleAngle => bg.cos_2f0(rho),
        BetaForm::Literal => bg.cos_f0(rho),
    };
    let one_minus = 1.0 - rho * rho;
    lambda * (1.0 + lambda) / one_minus + 2.0 * c / (rho * rho * one_minus)
}

const BETA_SCAN_POINTS: usize = 4000;

/// Sign changes of `β_λ` on a uniform grid of (0,1), excluding endpoints.
pub fn beta_sign_changes(lambda: f64, form: BetaForm) -> Vec<(f64, f64)> {
    let n = BETA_SCAN_POINTS;
    let grid: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&r| beta_with_form(r, lambda, form))
        .collect();
    grid.windows(2)
        .zip(vals.windows(2))
        .filter(|(_, v)| v[0] * v[1] < 0.0 || (v[0] == 0.0 && v[1] != 0.0))
        .map(|(g, _)| (g[0], g[1]))
        .collect()
}

/// The unique zero `ρ*_λ` of `β_λ` on (0,1) for λ ∈ (0,1), to 1e-12.
pub fn beta_root(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(ModeError::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, 1)",
        });
    }
    let brackets = beta_sign_changes(lambda, BetaForm::DoubleAngle);
    if brackets.len() != 1 {
        return Err(ModeError::RootCount {
            found: brackets.len(),
        });
    }
    let (mut a, mut b) = brackets[0];
    let fa = beta(a, lambda);
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        let fm = beta(m, lambda);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn background_special_values() {
        assert_eq!(eval_background(0.0).unwrap(), (0.0, 1.0));
        let (f, c2) = eval_background(1.0).unwrap();
        assert_relative_eq!(f, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(c2, -1.0);
        let (_, c2) = eval_background(2f64.sqrt() - 1.0).unwrap();
        assert!(c2.abs() < 1e-15);
        assert!(eval_background(1.5).is_err());
        assert!(eval_background(-0.1).is_err());
    }

    #[test]
    fn rational_and_trig_forms_agree() {
        let bg = BackgroundProfile;
        for k in 0..1000 {
            let r = k as f64 / 999.0;
            assert!(
                (bg.cos_2f0(r) - bg.cos_2f0_trig(r)).abs() < 1e-14,
                "rho={r}"
            );
            assert!((bg.cos_f0(r) - bg.f0(r).cos()).abs() < 1e-14);
            assert!((bg.sin_f0(r) - bg.f0(r).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn cos_2f0_has_single_zero() {
        let bg = BackgroundProfile;
        let n = 10_000;
        let changes = (0..n)
            .filter(|&k| {
                let a = bg.cos_2f0(k as f64 / n as f64);
                let b = bg.cos_2f0((k + 1) as f64 / n as f64);
                a * b < 0.0
            })
            .count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn gauge_mode_solves_pencil() {
        let rho = 0.5;
        let u2 = pencil_second_derivative(rho, c(1.0), c(theta(rho)), c(theta_prime(rho))).unwrap();
        assert!((u2.re - theta_second(rho)).abs() < 1e-12);
        assert_eq!(
            pencil_second_derivative(0.3, c(0.7), c(0.0), c(0.0)).unwrap(),
            c(0.0)
        );
        assert!(pencil_second_derivative(0.0, c(0.5), c(1.0), c(0.0)).is_err());
        assert!(pencil_second_derivative(1.0, c(0.5), c(1.0), c(0.0)).is_err());
    }

    #[test]
    fn zeroth_order_coefficient_matches_high_precision_value() {
        // 40-digit evaluation of r(1/2, 1/2) = -1.98666...
        let u2 = pencil_second_derivative(0.5, c(0.5), c(1.0), c(0.0)).unwrap();
        assert!((u2.re - (-1.986_666_666_666_666_7)).abs() < 1e-14);
        assert_eq!(u2.im, 0.0);
    }

    #[test]
    fn basis_residuals_and_wronskian() {
        let pencil = Pencil::real(1.0);
        for k in 0..=980 {
            let rho = 0.01 + k as f64 * 1e-3;
            let th_res = theta_second(rho) - pencil.rhs(rho, c(theta(rho)), c(theta_prime(rho))).re;
            assert!(th_res.abs() < 1e-10, "theta residual {th_res} at {rho}");
            let rel = relative_residual(
                &pencil,
                rho,
                c(chi(rho)),
                c(chi_prime(rho)),
                c(chi_second(rho)),
            );
            assert!(rel < 1e-10, "chi residual {rel} at {rho}");
            // closed-form χ' and χ'' against central differences
            let h = 1e-6 * rho;
            let fd = (chi(rho + h) - chi(rho - h)) / (2.0 * h);
            assert!(((fd - chi_prime(rho)) / chi_prime(rho)).abs() < 1e-6);
            let b = HomogeneousBasis::at(rho).unwrap();
            let w = b.theta * b.chi_prime - b.theta_prime * b.chi;
            assert!(((w - b.wronskian) / b.wronskian).abs() < 1e-12, "rho={rho}");
        }
    }

    #[test]
    fn sl_transform_examples() {
        let (ut, _) = sl_transform(c(0.0), c(0.0), 0.3, c(0.4)).unwrap();
        assert_eq!(ut, c(0.0));
        let (ut, _) = sl_transform(c(theta(0.5)), c(theta_prime(0.5)), 0.5, c(1.0)).unwrap();
        assert!((ut.re - 0.346_410_161_513_775_46).abs() < 1e-15);
    }

    #[test]
    fn sl_potential_symmetry_and_gauge_residual() {
        for k in 1..100 {
            let rho = k as f64 / 100.0;
            let a = sl_potential(rho, c(0.3)).unwrap();
            let b = sl_potential(rho, c(1.7)).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
        // θ̃ = ρ sqrt(1-ρ²) θ solves ũ'' = V ũ at λ = 1
        for k in 0..=90 {
            let rho = 0.05 + k as f64 * 0.01;
            let (m, dm) = sl_factor(rho, c(1.0));
            let m2 = sl_factor_second(rho, c(1.0));
            let tt2 =
                m2.re * theta(rho) + 2.0 * dm.re * theta_prime(rho) + m.re * theta_second(rho);
            let v = sl_potential(rho, c(1.0)).unwrap().re;
            assert!((tt2 - v * m.re * theta(rho)).abs() < 1e-10, "rho={rho}");
        }
        for k in 1..100 {
            let rho = k as f64 / 100.0;
            assert!(sl_spectral_part(rho, 0.3) - sl_spectral_part(rho, 1.0) > 0.0);
        }
    }

    #[test]
    fn sl_factor_second_matches_differences() {
        let lambda = Complex64::new(0.6, 0.2);
        for rho in [0.2, 0.5, 0.8] {
            let h = 1e-5;
            let fd = (sl_factor(rho + h, lambda).1 - sl_factor(rho - h, lambda).1) / (2.0 * h);
            assert!((fd - sl_factor_second(rho, lambda)).norm() < 1e-7);
        }
    }

    #[test]
    fn q_operator_examples() {
        for (u, du) in [(1.0, 0.0), (0.3, -2.0), (5.0, 7.0)] {
            assert_eq!(q_operator(0.4, c(1.0), c(u), c(du)).unwrap(), c(0.0));
        }
        let v = q_operator(0.5, c(0.0), c(1.0), c(0.0)).unwrap();
        assert!((v.re + 8.0 / 3.0).abs() < 1e-15);
        // Q vanishes identically only at λ = 1.
        for lam in [0.2, 0.9, 1.1, 2.5] {
            assert!(q_operator(0.5, c(lam), c(1.0), c(1.0)).unwrap().norm() > 0.0);
        }
        for k in 0..200 {
            let lam = -1.99 + k as f64 * 0.025;
            let a = lam - 1.0;
            let b = lam * (1.0 + lam) - 2.0;
            assert!(a.signum() == b.signum() || a == 0.0, "lambda={lam}");
        }
    }

    #[test]
    fn psi_examples() {
        let (v, d) = psi_eval(0.5, c(0.3), 0.5).unwrap();
        assert_eq!(v, c(0.0));
        assert!(d.re > 0.0);
        // λ = 1: antiderivative -1/ξ + atanh ξ
        let (v, _) = psi_eval(0.8, c(1.0), 0.5).unwrap();
        assert!((v.re - 1.299_306_144_334_054_8).abs() < 1e-11);
        let (a, _) = psi_eval(0.3, c(0.5), 0.5).unwrap();
        let (b, _) = psi_eval(0.6, c(0.5), 0.5).unwrap();
        assert!(a.re < b.re);
    }

    #[test]
    fn psi_base_point_shift_is_constant() {
        let lambda = c(0.7);
        let shift = |rho: f64| {
            psi_eval(rho, lambda, 0.3).unwrap().0 - psi_eval(rho, lambda, 0.6).unwrap().0
        };
        let s0 = shift(0.2);
        for rho in [0.35, 0.5, 0.75, 0.95] {
            assert!((shift(rho) - s0).norm() < 1e-12);
        }
        // W(1, ψ) = 1·ψ' - 0·ψ
        assert!(psi_prime(0.4, lambda).re > 0.0);
        assert!((psi_prime(0.75, lambda) - psi_prime_from_one(0.25, lambda)).norm() < 1e-14);
    }

    #[test]
    fn beta_root_values() {
        let r = beta_root(0.5).unwrap();
        assert!((r - 0.435_189_306_177_373_45).abs() < 1e-12);
        assert!((beta_root(1e-4).unwrap() - 0.414_216_075_283_664_9).abs() < 1e-12);
        assert!((beta_root(1e-9).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-8);
        for lam in [0.1, 0.3, 0.7, 0.9] {
            let root = beta_root(lam).unwrap();
            for k in 1..=100 {
                assert!(beta(k as f64 * 1e-3, lam) > 0.0);
            }
            for k in 1..100 {
                let rho = root + (1.0 - root) * k as f64 / 100.0;
                assert!(beta(rho, lam) < 0.0);
            }
        }
        assert!(beta_root(1.2).is_err());
        assert_eq!(beta_sign_changes(0.5, BetaForm::Literal).len(), 0);
    }

    proptest! {
        #[test]
        fn sl_round_trip(u_re in -5.0..5.0f64, u_im in -5.0..5.0f64, du in -5.0..5.0f64,
                         rho in 0.01..0.99f64, lre in 0.01..3.0f64, lim in -1.0..1.0f64) {
            let lambda = Complex64::new(lre, lim);
            let u = Complex64::new(u_re, u_im);
            let du = c(du);
            let (ut, dut) = sl_transform(u, du, rho, lambda).unwrap();
            let (u2, du2) = sl_inverse(ut, dut, rho, lambda).unwrap();
            prop_assert!((u2 - u).norm() < 1e-13 * (1.0 + u.norm()));
            prop_assert!((du2 - du).norm() < 1e-13 * (1.0 + du.norm() + u.norm()) * (1.0 + lre / (1.0 - rho * rho)));
        }
    }
}
