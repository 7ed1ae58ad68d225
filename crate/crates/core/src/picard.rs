//! Fixed-point solvers for the integral equations satisfied by `φ₀` near
//! ρ = 0 and `φ₁` near ρ = 1, with numerical contraction estimates.
//!
//! Near ρ = 0 the mode equation is written as a perturbation of the λ = 1
//! equation, `L₁u = Q_λ u`, and inverted with the fundamental system
//! `{θ, χ}`:
//!
//! ```text
//! Ku = θ - θ ∫₀^ρ (χ/W) Q_λu + χ ∫₀^ρ (θ/W) Q_λu,   W = W(θ,χ).
//! ```
//!
//! Near ρ = 1 the split `u'' + p u' = q u` has fundamental system `{1, ψ}`
//! with `ψ' = 1/(ρ²(1-ρ²)^λ)` and `W(1,ψ) = ψ'`, giving
//!
//! ```text
//! Ku = 1 + ∫_ρ^1 (ψ/ψ') q u - ψ(ρ) ∫_ρ^1 (q/ψ') u.
//! ```
//!
//! The second map is evaluated in the equivalent base-point-free form
//! `(Ku)' = -ψ'(ρ) ∫_ρ^1 (q/ψ') u`, `Ku = 1 - ∫_ρ^1 (Ku)'`, in the variable
//! `t = 1 - ρ` where `q/ψ' = t^{λ-1} × smooth`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};
use crate::frobenius::Center;
use crate::odecore::{
    chi, chi_prime, psi_prime_from_one, q_operator_unchecked, q_over_psi_prime_regular, theta,
    theta_prime, Pencil,
};
use crate::panel::PanelGrid;
use crate::quad::{gauss_legendre, integrate, QuadTolerance};

/// Contraction constants must fall below this, not merely below 1.
pub const SAFETY_THRESHOLD: f64 = 0.9;

/// Candidate radii tried near ρ = 0, largest first.
pub const RADIUS_CANDIDATES_ZERO: [f64; 15] = [
    0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001,
];

/// Candidate distances `1 - ρ₁` are `0.5 · 2^{-k}` for `k < ONE_LEVELS`.
pub const ONE_LEVELS: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionEstimate {
    pub side: Center,
    /// `ρ₀` or `ρ₁`.
    pub endpoint: f64,
    /// Distance of the endpoint from the singular point; exact even when
    /// `ρ₁` rounds to 1.
    pub distance: f64,
    /// `sup α + sup β` near 0, `sup α` near 1.
    pub bound_sup: f64,
    /// Estimated Lipschitz constant of the fixed-point map.
    pub constant: f64,
    pub contractive: bool,
}

/// Bound `|Q_λ w| (1-ρ²) ≤ C_λ ‖w‖_{C¹}` on `[0, ρ₀]`, with
/// `‖w‖_{C¹} = sup|w| + sup|w'|`.
pub fn q_bound(lambda: Complex64, rho0: f64) -> f64 {
    let a = 2.0 * (lambda - 1.0).norm() * rho0;
    let b = (lambda * (1.0 + lambda) - 2.0).norm();
    a.max(b)
}

/// `(|θ|A + |χ|B, |θ'|A + |χ'|B)` sampled on `[0, 0.9]`, where
/// `A = ∫₀^ρ |χ| ξ²/6`, `B = ∫₀^ρ |θ| ξ²/6` (using `(1-ξ²)|W(θ,χ)| = 6/ξ²`).
fn alpha_beta_zero() -> Result<Vec<(f64, f64, f64)>> {
    let mut pts: Vec<f64> = (0..=1800).map(|k| 0.9 * k as f64 / 1800.0).collect();
    pts.extend(RADIUS_CANDIDATES_ZERO);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let tol = QuadTolerance {
        abs: 1e-15,
        rel: 1e-12,
        ..QuadTolerance::default()
    };
    let mut a = 0.0;
    let mut b = 0.0;
    let mut out = Vec::with_capacity(pts.len());
    out.push((0.0, 0.0, 0.0));
    for w in pts.windows(2) {
        // |χ| ξ² is bounded at 0, so start just inside the interval
        a += integrate(
            |x: f64| chi(x).abs() * x * x / 6.0,
            w[0].max(1e-300),
            w[1],
            tol,
        )?
        .value;
        b += integrate(|x: f64| theta(x).abs() * x * x / 6.0, w[0], w[1], tol)?.value;
        let r = w[1];
        let alpha = theta(r).abs() * a + chi(r).abs() * b;
        let beta = theta_prime(r).abs() * a + chi_prime(r).abs() * b;
        out.push((r, alpha, beta));
    }
    Ok(out)
}

/// Largest candidate `ρ₀` with `C_λ (sup α + sup β) < 0.9` on `[0, ρ₀]`.
pub fn contraction_radius_zero(lambda: Complex64) -> Result<ContractionEstimate> {
    let table = alpha_beta_zero()?;
    let mut best = f64::INFINITY;
    for &rho0 in &RADIUS_CANDIDATES_ZERO {
        let (sa, sb) = table
            .iter()
            .filter(|(r, _, _)| *r <= rho0)
            .fold((0.0f64, 0.0f64), |(x, y), (_, a, b)| (x.max(*a), y.max(*b)));
        let constant = q_bound(lambda, rho0) * (sa + sb);
        best = best.min(constant);
        if constant < SAFETY_THRESHOLD {
            return Ok(ContractionEstimate {
                side: Center::Zero,
                endpoint: rho0,
                distance: rho0,
                bound_sup: sa + sb,
                constant,
                contractive: true,
            });
        }
    }
    Err(ModeError::NotContractive { best })
}

/// `α(ρ, λ)` near ρ = 1 (base point `c = 1/2`), at `t = 1 - ρ` sampled
/// geometrically with four points per octave from `1/2` down to
/// `0.5 · 2^{-ONE_LEVELS}`. Returned in decreasing `t`.
pub fn alpha_one_table(lambda: Complex64) -> Result<Vec<(f64, f64)>> {
    check_re_positive(lambda)?;
    let pencil = Pencil::new(lambda);
    let samples: Vec<f64> = (0..=4 * ONE_LEVELS)
        .map(|j| 0.5 * 2f64.powf(-(j as f64) / 4.0))
        .collect();
    let (gx, gw) = gauss_legendre(16);
    let gamma = lambda.re - 1.0;
    // ψ'(1-t) = t^{-λ} (2-t)^{-λ}/(1-t)², integrated on [lo, hi] in t
    let psi_piece = |lo: f64, hi: f64| -> Complex64 {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        gx.iter()
            .zip(&gw)
            .fold(Complex64::default(), |acc, (x, w)| {
                acc + psi_prime_from_one(c + h * x, lambda) * (w * h)
            })
    };
    // F(s) = ∫_s^{1/2} ψ'(1-t) dt, so ψ(1-s) = -F(s)
    let mut f_at = vec![Complex64::default(); samples.len()];
    for j in 1..samples.len() {
        f_at[j] = f_at[j - 1] + psi_piece(samples[j], samples[j - 1]);
    }
    let abs_g = |s: f64| q_over_psi_prime_regular(s, &pencil).norm();
    // per-interval pieces of ∫ |ψ q/ψ'| and ∫ |q/ψ'|
    let n = samples.len();
    let mut pa = vec![0.0; n];
    let mut pb = vec![0.0; n];
    for j in 0..n - 1 {
        let (lo, hi) = (samples[j + 1], samples[j]);
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in gx.iter().zip(&gw) {
            let s = c + h * x;
            let psi = f_at[j] + psi_piece(s, hi);
            let weight = s.powf(gamma) * abs_g(s) * w * h;
            pa[j] += psi.norm() * weight;
            pb[j] += weight;
        }
    }
    let eps = samples[n - 1];
    let tail_b = abs_g(eps) * eps.powf(lambda.re) / lambda.re;
    let tail_a = f_at[n - 1].norm() * tail_b;
    let mut a = tail_a;
    let mut b = tail_b;
    let mut out = vec![(0.0, 0.0); n];
    out[n - 1] = (eps, a + f_at[n - 1].norm() * b);
    for j in (0..n - 1).rev() {
        a += pa[j];
        b += pb[j];
        out[j] = (samples[j], a + f_at[j].norm() * b);
    }
    Ok(out)
}

/// Largest candidate interval `[ρ₁, 1]`, `1 - ρ₁ = 0.5 · 2^{-k}`, on which
/// the sampled sup of `α` is below 0.9.
pub fn contraction_radius_one(lambda: Complex64) -> Result<ContractionEstimate> {
    let table = alpha_one_table(lambda)?;
    // suffix maxima: sup of α over t ≤ samples[j]
    let mut sup = vec![0.0f64; table.len()];
    let mut running = 0.0f64;
    for j in (0..table.len()).rev() {
        running = running.max(table[j].1);
        sup[j] = running;
    }
    let mut best = f64::INFINITY;
    for k in 0..ONE_LEVELS {
        let j = 4 * k;
        best = best.min(sup[j]);
        if sup[j] < SAFETY_THRESHOLD {
            let t = table[j].0;
            return Ok(ContractionEstimate {
                side: Center::One,
                endpoint: 1.0 - t,
                distance: t,
                bound_sup: sup[j],
                constant: sup[j],
                contractive: true,
            });
        }
    }
    Err(ModeError::NotContractive { best })
}

fn check_re_positive(lambda: Complex64) -> Result<()> {
    if !(lambda.re > 0.0) {
        return Err(ModeError::Domain {
            name: "Re lambda",
            value: lambda.re,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Panels of the grid near ρ = 0.
    pub panels: usize,
    /// Halvings of the panel width toward ρ = 1.
    pub levels: usize,
    pub order: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 1000,
            panels: 24,
            levels: 40,
            order: 16,
        }
    }
}

impl PicardOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardRun {
    pub lambda: Complex64,
    pub side: Center,
    /// The interval in ρ, `[0, ρ₀]` or `[ρ₁, 1]`.
    pub interval: (f64, f64),
    /// Distance from the singular endpoint to the other end.
    pub distance: f64,
    /// Grid nodes in ρ; ascending near 0, descending near 1.
    pub nodes: Vec<f64>,
    /// Distance of each node from the singular endpoint.
    pub local: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
    /// Sup-norm of successive differences (C¹ near 0, C⁰ near 1).
    pub differences: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm of `Ku - u` for the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

impl PicardRun {
    /// Successive-difference ratios `d_{k+1}/d_k`.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Largest ratio among iterates whose difference exceeds `floor`
    /// (below it, rounding noise dominates).
    pub fn max_ratio_above(&self, floor: f64) -> Option<f64> {
        self.differences
            .windows(2)
            .skip(1)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// One application of the map near ρ = 0 on `grid`.
pub fn apply_map_zero(
    pencil: &Pencil,
    grid: &PanelGrid,
    u: &[Complex64],
    du: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let lambda = pencil.lambda();
    let nodes = grid.nodes();
    let mut f_chi = Vec::with_capacity(nodes.len());
    let mut f_theta = Vec::with_capacity(nodes.len());
    for (i, &x) in nodes.iter().enumerate() {
        let q = q_operator_unchecked(x, lambda, u[i], du[i]) + faulted_extra(pencil, x) * u[i];
        // 1/W(θ,χ) = -ρ²(1-ρ²)/6
        let inv_w = -x * x * (1.0 - x * x) / 6.0;
        f_chi.push(q * (chi(x) * inv_w));
        f_theta.push(q * (theta(x) * inv_w));
    }
    let i1 = grid.cumulative(&f_chi);
    let i2 = grid.cumulative(&f_theta);
    let mut ku = Vec::with_capacity(nodes.len());
    let mut kdu = Vec::with_capacity(nodes.len());
    for (i, &x) in nodes.iter().enumerate() {
        let (t, dt, c, dc) = (theta(x), theta_prime(x), chi(x), chi_prime(x));
        ku.push(t - i1[i] * t + i2[i] * c);
        kdu.push(dt - i1[i] * dt + i2[i] * dc);
    }
    (ku, kdu)
}

// A flipped spectral term shifts `r`, hence `Q_λ`, by `(σ-1)λ(1+λ)/(1-ρ²)`.
fn faulted_extra(pencil: &Pencil, x: f64) -> Complex64 {
    if pencil.is_faulted() {
        let l = pencil.lambda();
        l * (1.0 + l) * ((pencil.spectral_sign() - 1.0) / (1.0 - x * x))
    } else {
        Complex64::default()
    }
}

fn iterate<F>(
    mut step: F,
    u0: Vec<Complex64>,
    du0: Vec<Complex64>,
    opts: &PicardOptions,
    c1: bool,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<f64>)>
where
    F: FnMut(&[Complex64], &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>),
{
    let (mut u, mut du) = (u0, du0);
    let mut diffs = Vec::new();
    let mut growth = 0;
    for it in 1..=opts.max_iterations {
        let (nu, ndu) = step(&u, &du);
        let mut d = sup_diff(&nu, &u);
        if c1 {
            d += sup_diff(&ndu, &du);
        }
        if !d.is_finite() {
            return Err(ModeError::Divergence { iterations: it });
        }
        if let Some(&last) = diffs.last() {
            if d > last && d > opts.tol {
                growth += 1;
                if growth >= 3 {
                    return Err(ModeError::Divergence { iterations: it });
                }
            } else {
                growth = 0;
            }
        }
        diffs.push(d);
        u = nu;
        du = ndu;
        if d < opts.tol {
            return Ok((u, du, diffs));
        }
    }
    Err(ModeError::NoConvergence {
        iterations: opts.max_iterations,
        last: diffs.last().copied().unwrap_or(f64::NAN),
    })
}

/// Fixed point of the ρ = 0 map on `[0, ρ₀]`, starting from `θ`.
pub fn picard_phi0(lambda: Complex64, rho0: f64, tol: f64) -> Result<PicardRun> {
    picard_phi0_with(&Pencil::new(lambda), rho0, &PicardOptions::with_tol(tol))
}

pub fn picard_phi0_with(pencil: &Pencil, rho0: f64, opts: &PicardOptions) -> Result<PicardRun> {
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(ModeError::Domain {
            name: "rho0",
            value: rho0,
            domain: "(0, 1)",
        });
    }
    let grid = PanelGrid::uniform(0.0, rho0, opts.panels, opts.order);
    let nodes = grid.nodes().to_vec();
    let u0: Vec<Complex64> = nodes
        .iter()
        .map(|&x| Complex64::new(theta(x), 0.0))
        .collect();
    let du0: Vec<Complex64> = nodes
        .iter()
        .map(|&x| Complex64::new(theta_prime(x), 0.0))
        .collect();
    let step = |u: &[Complex64], du: &[Complex64]| apply_map_zero(pencil, &grid, u, du);
    let (u, du, differences) = iterate(step, u0, du0, opts, true)?;
    Ok(PicardRun {
        lambda: pencil.lambda(),
        side: Center::Zero,
        interval: (0.0, rho0),
        distance: rho0,
        local: nodes.clone(),
        nodes,
        u,
        du,
        iterations: differences.len(),
        residual: differences.last().copied().unwrap_or(0.0),
        differences,
        converged: true,
    })
}

/// One application of the ρ = 1 map on a grid in `t = 1 - ρ` starting at 0.
pub fn apply_map_one(
    pencil: &Pencil,
    grid: &PanelGrid,
    u: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let lambda = pencil.lambda();
    let t = grid.nodes();
    let g: Vec<Complex64> = t
        .iter()
        .zip(u)
        .map(|(&s, &v)| q_over_psi_prime_regular(s, pencil) * v)
        .collect();
    let j = grid.cumulative_weighted(&g, lambda - 1.0);
    let du: Vec<Complex64> = t
        .iter()
        .zip(&j)
        .map(|(&s, &jj)| -psi_prime_from_one(s, lambda) * jj)
        .collect();
    let integral = grid.cumulative(&du);
    let ku = integral
        .iter()
        .map(|v| Complex64::new(1.0, 0.0) - v)
        .collect();
    (ku, du)
}

/// Fixed point of the ρ = 1 map on `[ρ₁, 1]`, `ρ₁ = 1 - distance`,
/// starting from the constant 1.
pub fn picard_phi1(lambda: Complex64, distance: f64, tol: f64) -> Result<PicardRun> {
    picard_phi1_with(
        &Pencil::new(lambda),
        distance,
        &PicardOptions::with_tol(tol),
    )
}

pub fn picard_phi1_with(pencil: &Pencil, distance: f64, opts: &PicardOptions) -> Result<PicardRun> {
    check_re_positive(pencil.lambda())?;
    if !(distance > 0.0 && distance < 1.0) {
        return Err(ModeError::Domain {
            name: "1 - rho1",
            value: distance,
            domain: "(0, 1)",
        });
    }
    let grid = PanelGrid::graded_toward_zero(distance, opts.levels, 5, opts.order);
    let local = grid.nodes().to_vec();
    let u0 = vec![Complex64::new(1.0, 0.0); local.len()];
    let du0 = vec![Complex64::default(); local.len()];
    let step = |u: &[Complex64], _du: &[Complex64]| apply_map_one(pencil, &grid, u);
    let (u, du, differences) = iterate(step, u0, du0, opts, false)?;
    Ok(PicardRun {
        lambda: pencil.lambda(),
        side: Center::One,
        interval: (1.0 - distance, 1.0),
        distance,
        nodes: local.iter().map(|t| 1.0 - t).collect(),
        local,
        u,
        du,
        iterations: differences.len(),
        residual: differences.last().copied().unwrap_or(0.0),
        differences,
        converged: true,
    })
}
