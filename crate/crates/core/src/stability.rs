//! Executable checks behind the nonexistence of regular modes for
//! λ ∈ (0, 1): positivity of `φ₀`, the integral identity for
//! eigenfunctions, the sign argument at critical points, the regularity
//! condition at ρ = 1, integrability in the Sturm–Liouville weight and the
//! consistency of mode solutions with the time-dependent equation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{phi0_profile, phi1_profile, scan_real, ShootingConfig};
use crate::error::{ModeError, Result};
use crate::frobenius::{regularity_ratio, series_phi1_for};
use crate::ode::{Dopri5, State};
use crate::odecore::{
    beta, beta_root, beta_sign_changes, sl_factor, sl_factor_second, sl_potential,
    sl_spectral_part, sl_transform, theta, theta_prime, BackgroundProfile, BetaForm, Pencil,
};
use crate::panel::PanelGrid;
use crate::picard::{contraction_radius_one, picard_phi1_with, PicardOptions};
use crate::quad::{integrate, QuadTolerance};

/// Distance kept from the singular endpoints in grid checks.
pub const ENDPOINT_MARGIN: f64 = 1e-3;
/// Tolerance of the critical-point identity `u'' = β u`, relative to
/// `max(1, |β u|)`.
pub const CRITICAL_POINT_TOLERANCE: f64 = 1e-8;
/// Step of the five-point difference used for `u''` at critical points.
pub const CRITICAL_POINT_STEP: f64 = 1e-3;
pub const REGULARITY_TOLERANCE: f64 = 1e-6;
pub const PDE_TOLERANCE: f64 = 1e-8;

/// `n` equispaced points of `[margin, 1 - margin]`.
pub fn interior_grid(n: usize, margin: f64) -> Vec<f64> {
    (0..n)
        .map(|k| margin + (1.0 - 2.0 * margin) * k as f64 / (n - 1) as f64)
        .collect()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub lambda: f64,
    pub min_value: f64,
    pub argmin: f64,
    pub first_violation: Option<f64>,
    pub pass: bool,
}

/// `φ₀ > 0` at every point of `grid` (ascending, inside `(0, 1)`).
pub fn check_positivity(
    lambda: f64,
    grid: &[f64],
    config: &ShootingConfig,
) -> Result<PositivityVerdict> {
    let (states, _) = phi0_profile(real(lambda), grid, config)?;
    let mut min_value = f64::INFINITY;
    let mut argmin = f64::NAN;
    let mut first_violation = None;
    for (&rho, s) in grid.iter().zip(&states) {
        let v = s[0].re;
        if v < min_value {
            min_value = v;
            argmin = rho;
        }
        if v <= 0.0 && first_violation.is_none() {
            first_violation = Some(rho);
        }
    }
    Ok(PositivityVerdict {
        lambda,
        min_value,
        argmin,
        first_violation,
        pass: first_violation.is_none(),
    })
}

/// Composite Simpson rule on a nonuniform grid (at least three points).
pub fn simpson_nonuniform<T>(x: &[f64], y: &[T]) -> Result<T>
where
    T: crate::quad::Scalar,
{
    if x.len() < 3 || x.len() != y.len() {
        return Err(ModeError::Config(
            "Simpson rule needs at least three matching samples".into(),
        ));
    }
    let n = x.len() - 1;
    let mut total = T::default();
    let mut i = 0;
    while i + 2 <= n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let s = h0 + h1;
        total = total
            + (y[i] * (2.0 - h1 / h0)
                + y[i + 1] * (s * s / (h0 * h1))
                + y[i + 2] * (2.0 - h0 / h1))
                * (s / 6.0);
        i += 2;
    }
    if i < n {
        let h0 = x[n - 1] - x[n - 2];
        let h1 = x[n] - x[n - 1];
        let a = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let b = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let c = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total = total + y[n] * a + y[n - 1] * b - y[n - 2] * c;
    }
    Ok(total)
}

/// `∫ (θ/W(θ,χ)) Q_λ u dρ` over the sampled range, with the integrand
/// simplified to `-θ ρ² [2(λ-1)ρ u' + (λ(1+λ) - 2) u]/6`.
pub fn integral_identity(
    lambda: Complex64,
    rho: &[f64],
    u: &[Complex64],
    du: &[Complex64],
) -> Result<Complex64> {
    if rho.iter().any(|r| !(0.0..=1.0).contains(r)) || rho.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModeError::Config(
            "samples must be increasing inside [0, 1]".into(),
        ));
    }
    if u.len() != rho.len() || du.len() != rho.len() {
        return Err(ModeError::Config("sample arrays differ in length".into()));
    }
    let f: Vec<Complex64> = rho
        .iter()
        .zip(u.iter().zip(du))
        .map(|(&r, (&v, &dv))| {
            let q = (lambda - 1.0) * (2.0 * r) * dv + (lambda * (1.0 + lambda) - 2.0) * v;
            -q * (theta(r) * r * r / 6.0)
        })
        .collect();
    simpson_nonuniform(rho, &f)
}

/// Zeros of `du` on `grid`, located by bisection to 1e-12 inside each
/// bracket where the sampled sign changes.
pub fn derivative_sign_changes<F: Fn(f64) -> f64>(du: F, grid: &[f64]) -> Vec<f64> {
    let vals: Vec<f64> = grid.iter().map(|&x| du(x)).collect();
    let mut out = Vec::new();
    for k in 0..grid.len().saturating_sub(1) {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if fa == 0.0 {
            if k > 0 && vals[k - 1] * fb < 0.0 {
                out.push(grid[k]);
            }
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        let (mut a, mut b, mut ga) = (grid[k], grid[k + 1], fa);
        while b - a > 1e-12 {
            let m = 0.5 * (a + b);
            let gm = du(m);
            if gm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (gm > 0.0) == (ga > 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// `|u'(1) - (2-λ-λ²)/(2λ) u(1)|`.
pub fn regularity_condition(lambda: Complex64, u1: Complex64, du1: Complex64) -> Result<f64> {
    if lambda == Complex64::default() {
        return Err(ModeError::Domain {
            name: "lambda",
            value: 0.0,
            domain: "lambda != 0",
        });
    }
    Ok((du1 - regularity_ratio(lambda) * u1).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solution {
    Phi0,
    Phi1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub solution: Solution,
    pub rho: f64,
    pub u: f64,
    /// `u''` from differences of the integrated `u'`.
    pub d2u: f64,
    pub beta_u: f64,
    /// `|u'' - β u| / max(1, |β u|)`.
    pub deviation: f64,
    /// `sign(u'') = sign(β u)`.
    pub sign_consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignArgumentVerdict {
    pub lambda: f64,
    pub beta_root: Option<f64>,
    pub beta_sign_changes: usize,
    /// `β_λ < 0` at every sampled point of `(ρ*, 1)`.
    pub beta_negative_beyond_root: bool,
    pub critical_points: Vec<CriticalPoint>,
    /// First critical point violating the identity or the sign rule.
    pub first_violation: Option<f64>,
    pub pass: bool,
}

fn step_state(pencil: &Pencil, from: f64, state: State, to: &[f64]) -> Result<Vec<State>> {
    let solver = Dopri5::with_tolerances(1e-12, 1e-14);
    Ok(solver
        .solve(|x, y| [y[1], pencil.rhs(x, y[0], y[1])], from, state, to)?
        .0)
}

fn critical_points_of(
    pencil: &Pencil,
    solution: Solution,
    grid: &[f64],
    states: &[State],
) -> Result<Vec<CriticalPoint>> {
    let lambda = pencil.lambda().re;
    let h = CRITICAL_POINT_STEP;
    let mut out = Vec::new();
    for k in 0..grid.len() - 1 {
        let (fa, fb) = (states[k][1].re, states[k + 1][1].re);
        if fa * fb > 0.0 || (fa == 0.0 && fb == 0.0) {
            continue;
        }
        let (lo, hi) = (grid[k], grid[k + 1]);
        let anchor = (lo, states[k]);
        let du_at =
            |x: f64| -> Result<f64> { Ok(step_state(pencil, anchor.0, anchor.1, &[x])?[0][1].re) };
        let (mut a, mut b, mut ga) = (lo, hi, fa);
        while b - a > 1e-13 {
            let m = 0.5 * (a + b);
            let gm = du_at(m)?;
            if (gm > 0.0) == (ga > 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        let rc = 0.5 * (a + b);
        let centre = step_state(pencil, anchor.0, anchor.1, &[rc])?[0];
        let fwd = step_state(pencil, rc, centre, &[rc + h, rc + 2.0 * h])?;
        let back = step_state(pencil, rc, centre, &[rc - h, rc - 2.0 * h])?;
        let d2u =
            (-fwd[1][1].re + 8.0 * fwd[0][1].re - 8.0 * back[0][1].re + back[1][1].re) / (12.0 * h);
        let u = centre[0].re;
        let beta_u = beta(rc, lambda) * u;
        let deviation = (d2u - beta_u).abs() / beta_u.abs().max(1.0);
        let sign_consistent = beta_u.abs() < 1e-6 || (d2u > 0.0) == (beta_u > 0.0);
        out.push(CriticalPoint {
            solution,
            rho: rc,
            u,
            d2u,
            beta_u,
            deviation,
            sign_consistent,
        });
    }
    Ok(out)
}

/// Checks the mechanism of the sign argument on the computed `φ₀` and `φ₁`:
/// at every interior critical point `u'' = β_λ u`, so beyond the unique zero
/// `ρ*` of `β_λ` a positive critical value is a strict local maximum.
pub fn critical_point_sign_argument(
    lambda: f64,
    config: &ShootingConfig,
) -> Result<SignArgumentVerdict> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(ModeError::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, 1]",
        });
    }
    let grid = interior_grid(2001, ENDPOINT_MARGIN);
    let pencil = config.pencil(real(lambda));
    let (s0, _) = phi0_profile(real(lambda), &grid, config)?;
    let desc: Vec<f64> = grid.iter().rev().copied().collect();
    let (mut s1, _) = phi1_profile(real(lambda), &desc, config)?;
    s1.reverse();
    let mut critical_points = critical_points_of(&pencil, Solution::Phi0, &grid, &s0)?;
    critical_points.extend(critical_points_of(&pencil, Solution::Phi1, &grid, &s1)?);

    let (root, changes, negative) = if lambda < 1.0 {
        let root = beta_root(lambda)?;
        let changes = beta_sign_changes(lambda, BetaForm::DoubleAngle).len();
        let negative = (1..1000)
            .map(|k| root + (1.0 - root) * k as f64 / 1000.0)
            .all(|r| beta(r, lambda) < 0.0);
        (Some(root), changes, negative)
    } else {
        (
            None,
            beta_sign_changes(lambda, BetaForm::DoubleAngle).len(),
            true,
        )
    };
    let first_violation = critical_points
        .iter()
        .find(|c| c.deviation > CRITICAL_POINT_TOLERANCE || !c.sign_consistent)
        .map(|c| c.rho);
    let beta_ok = lambda == 1.0 || changes == 1;
    Ok(SignArgumentVerdict {
        lambda,
        beta_root: root,
        beta_sign_changes: changes,
        beta_negative_beyond_root: negative,
        critical_points,
        first_violation,
        pass: first_violation.is_none() && beta_ok && negative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormClass {
    Integrable,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormVerdict {
    pub lambda: f64,
    /// Exponent `λ - 2` of `|ũ₁|²/(1-ρ²)²` as ρ → 1.
    pub tail_exponent: f64,
    pub by_exponent: NormClass,
    /// Integral of the weighted density over `t = 1-ρ ∈ [10^{-k-1}, 10^{-k}]`,
    /// `k = 2..8`.
    pub decade_increments: Vec<f64>,
    /// Decay rate `-log10(Δ_{k+1}/Δ_k)` of the last two increments.
    pub observed_rate: f64,
    pub by_quadrature: NormClass,
    /// Agreed class, or inconclusive when the methods differ.
    pub verdict: NormClass,
}

/// Whether `ũ₁ = ρ(1-ρ²)^{λ/2} φ₁` has finite norm in `L²((0,1), dρ/(1-ρ²)²)`
/// near ρ = 1, by the tail exponent and by growth of the truncated integral.
pub fn weighted_norm_classification(
    lambda: f64,
    config: &ShootingConfig,
) -> Result<WeightedNormVerdict> {
    if !(lambda > 0.0) {
        return Err(ModeError::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    let exponent = lambda - 2.0;
    let by_exponent = if exponent > -1.0 {
        NormClass::Integrable
    } else {
        NormClass::Divergent
    };
    let series = series_phi1_for(&config.pencil(real(lambda)), config.order)?;
    let density = |t: f64| -> f64 {
        let rho = 1.0 - t;
        let u = series
            .eval_local(t)
            .map(|(u, _)| u.norm())
            .unwrap_or(f64::NAN);
        rho * rho * (t * (2.0 - t)).powf(exponent) * u * u
    };
    let tol = QuadTolerance {
        abs: 0.0,
        rel: 1e-12,
        ..QuadTolerance::default()
    };
    let mut increments = Vec::new();
    for k in 2..8 {
        let hi = 10f64.powi(-k);
        let lo = hi / 10.0;
        increments.push(integrate(density, lo, hi, tol)?.value);
    }
    let n = increments.len();
    let observed_rate = -(increments[n - 1] / increments[n - 2]).log10();
    let by_quadrature = if observed_rate > 1e-3 {
        NormClass::Integrable
    } else {
        // logarithmic growth (rate 0) is divergent as well
        NormClass::Divergent
    };
    let verdict = if by_exponent == by_quadrature {
        by_exponent
    } else {
        NormClass::Inconclusive
    };
    Ok(WeightedNormVerdict {
        lambda,
        tail_exponent: exponent,
        by_exponent,
        decade_increments: increments,
        observed_rate,
        by_quadrature,
        verdict,
    })
}

/// Time-dependent linearized operator applied to `w = e^{λτ} u` at τ = 0:
/// `λ²u - (1-ρ²)u'' + 2ρλu' + λu - 2(1-ρ²)u'/ρ + 2cos(2f0) u/ρ²`.
pub fn pde_residual(
    lambda: Complex64,
    rho: f64,
    u: Complex64,
    du: Complex64,
    d2u: Complex64,
) -> Complex64 {
    let one_minus = 1.0 - rho * rho;
    lambda * lambda * u - d2u * one_minus + lambda * du * (2.0 * rho) + lambda * u
        - du * (2.0 * one_minus / rho)
        + u * (2.0 * BackgroundProfile.cos_2f0(rho) / (rho * rho))
}

/// `u''` from the transformed equation `ũ'' = V ũ`, independent of the
/// first-order form of the mode equation.
pub fn second_derivative_via_transform(
    lambda: Complex64,
    rho: f64,
    u: Complex64,
    du: Complex64,
) -> Result<Complex64> {
    let v = sl_potential(rho, lambda)?;
    let (m, dm) = sl_factor(rho, lambda);
    let d2m = sl_factor_second(rho, lambda);
    Ok((v * m * u - d2m * u - dm * du * 2.0) / m)
}

/// Sup over `samples` (`(ρ, u, u', u'')`) of the time-dependent residual.
pub fn pde_residual_sup(
    lambda: Complex64,
    samples: &[(f64, Complex64, Complex64, Complex64)],
) -> (f64, Option<f64>) {
    let mut sup = 0.0;
    let mut at = None;
    for &(rho, u, du, d2u) in samples {
        let r = pde_residual(lambda, rho, u, du, d2u).norm();
        if r > sup {
            sup = r;
            at = Some(rho);
        }
    }
    (sup, at)
}

/// Residual of the time-dependent equation for the shooting `φ₀` on
/// `[lo, hi]`, with `u''` taken from the transformed equation.
pub fn mode_pde_residual(
    lambda: Complex64,
    lo: f64,
    hi: f64,
    n: usize,
    config: &ShootingConfig,
) -> Result<(f64, Option<f64>)> {
    let grid: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let (states, _) = phi0_profile(lambda, &grid, config)?;
    let mut samples = Vec::with_capacity(n);
    for (&rho, s) in grid.iter().zip(&states) {
        let d2u = second_derivative_via_transform(lambda, rho, s[0], s[1])?;
        samples.push((rho, s[0], s[1], d2u));
    }
    Ok(pde_residual_sup(lambda, &samples))
}

/// Both sides of `∫_a^b (p_λ - p_1) ũ θ̃ = W(ũ,θ̃)(a) - W(ũ,θ̃)(b)` for the
/// transformed shooting `φ₀` and gauge mode.
pub fn comparison_identity(
    lambda: f64,
    a: f64,
    b: f64,
    config: &ShootingConfig,
) -> Result<(f64, f64)> {
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(ModeError::Config("need 0 < a < b < 1".into()));
    }
    let grid = PanelGrid::uniform(a, b, 24, 16);
    let mut pts = vec![a];
    pts.extend_from_slice(grid.nodes());
    pts.push(b);
    let (states, _) = phi0_profile(real(lambda), &pts, config)?;
    let transformed = |rho: f64, s: &State, lam: f64| -> Result<(f64, f64)> {
        let (v, dv) = sl_transform(s[0], s[1], rho, real(lam))?;
        Ok((v.re, dv.re))
    };
    let theta_t = |rho: f64| -> Result<(f64, f64)> {
        transformed(rho, &[real(theta(rho)), real(theta_prime(rho))], 1.0)
    };
    let mut integrand = Vec::with_capacity(grid.len());
    for (k, &rho) in grid.nodes().iter().enumerate() {
        let (ut, _) = transformed(rho, &states[k + 1], lambda)?;
        let (tt, _) = theta_t(rho)?;
        integrand.push((sl_spectral_part(rho, lambda) - sl_spectral_part(rho, 1.0)) * ut * tt);
    }
    let lhs = grid.integral(&integrand);
    let w = |rho: f64, s: &State| -> Result<f64> {
        let (u, du) = transformed(rho, s, lambda)?;
        let (t, dt) = theta_t(rho)?;
        Ok(u * dt - du * t)
    };
    let rhs = w(a, &states[0])? - w(b, &states[states.len() - 1])?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl ScanRange {
    pub fn contains_gauge(&self) -> bool {
        self.lo <= 1.0 && 1.0 <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateConfig {
    pub shooting: ShootingConfig,
    pub ranges: Vec<ScanRange>,
    pub positivity_lambdas: Vec<f64>,
    pub sign_argument_lambdas: Vec<f64>,
    pub regularity_lambdas: Vec<f64>,
    pub pde_lambdas: Vec<f64>,
    pub margin: f64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            shooting: ShootingConfig::default(),
            ranges: vec![
                ScanRange {
                    lo: 0.05,
                    hi: 0.95,
                    n: 181,
                },
                ScanRange {
                    lo: 0.9,
                    hi: 1.1,
                    n: 41,
                },
                ScanRange {
                    lo: 1.05,
                    hi: 3.0,
                    n: 100,
                },
            ],
            positivity_lambdas: (0..20).map(|k| 0.05 + 0.1 * k as f64).collect(),
            sign_argument_lambdas: vec![0.3, 0.5, 0.7],
            regularity_lambdas: (1..10).map(|k| k as f64 / 10.0).collect(),
            pde_lambdas: vec![0.25, 0.5, 0.75],
            margin: ENDPOINT_MARGIN,
        }
    }
}

impl CertificateConfig {
    /// Only the scan over `[lo, hi]`, plus the λ-wise checks that fall inside it.
    pub fn restricted(lo: f64, hi: f64, n: usize, shooting: ShootingConfig) -> Self {
        let d = Self::default();
        let inside = |v: Vec<f64>| {
            v.into_iter()
                .filter(|l| *l >= lo && *l <= hi)
                .collect::<Vec<_>>()
        };
        Self {
            shooting,
            ranges: vec![ScanRange { lo, hi, n }],
            positivity_lambdas: inside(d.positivity_lambdas),
            sign_argument_lambdas: inside(d.sign_argument_lambdas),
            regularity_lambdas: inside(d.regularity_lambdas),
            pde_lambdas: inside(d.pde_lambdas),
            margin: d.margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Where the check failed: a ρ for pointwise checks, a λ for scans.
    pub location: Option<f64>,
    /// Set when the check could not be computed.
    pub error: Option<String>,
}

impl CheckResult {
    fn from_result(name: String, r: Result<(bool, String, Option<f64>)>) -> Self {
        match r {
            Ok((pass, detail, location)) => Self {
                name,
                pass,
                detail,
                location,
                error: None,
            },
            Err(e) => Self {
                name,
                pass: false,
                detail: "computation failed".into(),
                location: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRootCount {
    pub lambda: f64,
    pub double_angle: usize,
    pub literal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub miss: f64,
    pub gauge_root: f64,
    pub critical_point: f64,
    pub regularity: f64,
    pub pde: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub ranges: Vec<ScanRange>,
    pub checks: Vec<CheckResult>,
    /// Sign changes of `β_λ` on (0,1) for both printed forms of the cosine.
    pub beta_root_counts: Vec<BetaRootCount>,
    pub roots: Vec<f64>,
    pub tolerances: Tolerances,
    pub pass: bool,
}

impl CertificateReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn has_errors(&self) -> bool {
        self.checks.iter().any(|c| c.error.is_some())
    }
}

enum Task {
    Scan(ScanRange),
    Positivity(f64),
    BetaRoots(f64),
    Regularity(f64),
    SignArgument(f64),
    Pde(f64),
}

const GAUGE_TOLERANCE: f64 = 1e-6;

fn run_task(task: &Task, cfg: &CertificateConfig) -> (CheckResult, Vec<f64>) {
    let sc = &cfg.shooting;
    match *task {
        Task::Scan(r) => {
            let name = format!("scan[{},{}]", r.lo, r.hi);
            let mut roots = Vec::new();
            let res = scan_real(r.lo, r.hi, r.n, sc).map(|rep| {
                roots = rep.roots.iter().map(|x| x.lambda).collect();
                if rep.metadata.failures > 0 {
                    let at = rep
                        .points
                        .iter()
                        .find(|p| p.error.is_some())
                        .map(|p| p.lambda);
                    return (
                        false,
                        format!("{} grid evaluations failed", rep.metadata.failures),
                        at,
                    );
                }
                let gauge: Vec<f64> = roots
                    .iter()
                    .copied()
                    .filter(|l| (l - 1.0).abs() < GAUGE_TOLERANCE)
                    .collect();
                let other = roots
                    .iter()
                    .copied()
                    .find(|l| (l - 1.0).abs() >= GAUGE_TOLERANCE);
                if let Some(l) = other {
                    return (false, format!("root at lambda = {l:.10}"), Some(l));
                }
                if r.contains_gauge() && gauge.len() != 1 {
                    return (
                        false,
                        format!("expected one root at 1, found {}", gauge.len()),
                        Some(1.0),
                    );
                }
                (true, format!("{} root(s) {:?}", roots.len(), roots), None)
            });
            (CheckResult::from_result(name, res), roots)
        }
        Task::Positivity(l) => {
            let grid = interior_grid(999, cfg.margin);
            let res = check_positivity(l, &grid, sc).map(|v| {
                (
                    v.pass,
                    format!("min phi0 = {:.6e} at rho = {:.4}", v.min_value, v.argmin),
                    v.first_violation,
                )
            });
            (
                CheckResult::from_result(format!("positivity(lambda={l})"), res),
                Vec::new(),
            )
        }
        Task::BetaRoots(l) => {
            let n = beta_sign_changes(l, BetaForm::DoubleAngle);
            let res = Ok((
                n.len() == 1,
                format!("{} sign change(s)", n.len()),
                n.get(1).map(|b| b.0),
            ));
            (
                CheckResult::from_result(format!("beta-root-count(lambda={l})"), res),
                Vec::new(),
            )
        }
        Task::Regularity(l) => {
            let pencil = sc.pencil(real(l));
            let res = contraction_radius_one(real(l)).and_then(|est| {
                let run = picard_phi1_with(&pencil, est.distance, &PicardOptions::default())?;
                let grid = PanelGrid::graded_toward_zero(
                    est.distance,
                    PicardOptions::default().levels,
                    5,
                    16,
                );
                let u1 = grid.interpolate(&run.u, 0.0);
                let du1 = grid.interpolate(&run.du, 0.0);
                let r = regularity_condition(real(l), u1, du1)?;
                Ok((
                    r < REGULARITY_TOLERANCE,
                    format!("|u'(1) - ratio u(1)| = {r:.3e}"),
                    (r >= REGULARITY_TOLERANCE).then_some(1.0),
                ))
            });
            (
                CheckResult::from_result(format!("regularity(lambda={l})"), res),
                Vec::new(),
            )
        }
        Task::SignArgument(l) => {
            let res = critical_point_sign_argument(l, sc).map(|v| {
                let worst = v
                    .critical_points
                    .iter()
                    .map(|c| c.deviation)
                    .fold(0.0, f64::max);
                (
                    v.pass,
                    format!(
                        "{} critical point(s), max deviation {worst:.2e}, beta sign changes {}",
                        v.critical_points.len(),
                        v.beta_sign_changes
                    ),
                    v.first_violation,
                )
            });
            (
                CheckResult::from_result(format!("sign-argument(lambda={l})"), res),
                Vec::new(),
            )
        }
        Task::Pde(l) => {
            let res = mode_pde_residual(real(l), 0.05, 0.95, 181, sc).map(|(r, at)| {
                (
                    r < PDE_TOLERANCE,
                    format!("sup residual {r:.3e}"),
                    if r < PDE_TOLERANCE { None } else { at },
                )
            });
            (
                CheckResult::from_result(format!("mode-pde(lambda={l})"), res),
                Vec::new(),
            )
        }
    }
}

/// Runs every check and assembles the report; compute failures become
/// failed checks carrying the error message.
pub fn full_certificate(cfg: &CertificateConfig) -> Result<CertificateReport> {
    cfg.shooting.validate()?;
    let mut tasks: Vec<Task> = cfg.ranges.iter().map(|&r| Task::Scan(r)).collect();
    tasks.extend(cfg.positivity_lambdas.iter().map(|&l| Task::Positivity(l)));
    tasks.extend(
        cfg.regularity_lambdas
            .iter()
            .filter(|l| **l < 1.0)
            .map(|&l| Task::BetaRoots(l)),
    );
    tasks.extend(cfg.regularity_lambdas.iter().map(|&l| Task::Regularity(l)));
    tasks.extend(
        cfg.sign_argument_lambdas
            .iter()
            .map(|&l| Task::SignArgument(l)),
    );
    tasks.extend(cfg.pde_lambdas.iter().map(|&l| Task::Pde(l)));

    let results: Vec<(CheckResult, Vec<f64>)> =
        tasks.par_iter().map(|t| run_task(t, cfg)).collect();
    let mut checks = Vec::with_capacity(results.len());
    let mut roots = Vec::new();
    for (c, r) in results {
        checks.push(c);
        roots.extend(r);
    }
    let beta_root_counts = cfg
        .regularity_lambdas
        .iter()
        .filter(|l| **l < 1.0)
        .map(|&l| BetaRootCount {
            lambda: l,
            double_angle: beta_sign_changes(l, BetaForm::DoubleAngle).len(),
            literal: beta_sign_changes(l, BetaForm::Literal).len(),
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(CertificateReport {
        ranges: cfg.ranges.clone(),
        checks,
        beta_root_counts,
        roots,
        tolerances: Tolerances {
            miss: cfg.shooting.miss_tolerance,
            gauge_root: GAUGE_TOLERANCE,
            critical_point: CRITICAL_POINT_TOLERANCE,
            regularity: REGULARITY_TOLERANCE,
            pde: PDE_TOLERANCE,
            margin: cfg.margin,
        },
        pass,
    })
}
