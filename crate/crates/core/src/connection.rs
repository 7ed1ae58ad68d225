//! Two-sided shooting and the miss function.
//!
//! `φ₀` is launched from its Frobenius series at `ρ = δ₀` and integrated
//! forward, `φ₁` from its series at `ρ = 1 - δ₁` and integrated backward.
//! Their Wronskian at a matching point vanishes exactly when the two are
//! proportional, i.e. when a solution regular on all of `[0, 1]` exists.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};
use crate::frobenius::{series_phi0_for, series_phi1_for, DEFAULT_ORDER};
use crate::ode::{Dopri5, State, Stats};
use crate::odecore::{theta, theta_prime, CoefficientFault, Pencil};

/// Offset applied to integer grid points other than the gauge value.
pub const INTEGER_NUDGE: f64 = 1e-9;
/// Bisection stops once brackets are narrower than this.
pub const REFINE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Series hand-off offset at ρ = 0.
    pub delta0: f64,
    /// Series hand-off offset at ρ = 1.
    pub delta1: f64,
    pub match_point: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Frobenius truncation order.
    pub order: usize,
    /// `|normalized miss|` below which λ is an eigenvalue candidate.
    pub miss_tolerance: f64,
    /// Worker threads for scans; 0 uses the global pool.
    pub workers: usize,
    pub fault: Option<CoefficientFault>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            delta0: 1e-2,
            delta1: 1e-2,
            match_point: 0.5,
            rtol: 1e-11,
            atol: 1e-13,
            order: DEFAULT_ORDER,
            miss_tolerance: 1e-7,
            workers: 0,
            fault: None,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(ModeError::Config(m.to_string()));
        if !(self.delta0 > 0.0 && self.delta1 > 0.0 && self.delta0 + self.delta1 < 1.0) {
            return err("offsets must be positive with delta0 + delta1 < 1");
        }
        if !(self.match_point > self.delta0 && self.match_point < 1.0 - self.delta1) {
            return err("matching point must lie in (delta0, 1 - delta1)");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return err("integrator tolerances must be positive");
        }
        if self.order < 4 {
            return err("series order must be at least 4");
        }
        if !(self.miss_tolerance > 0.0) {
            return err("miss tolerance must be positive");
        }
        Ok(())
    }

    pub fn with_match_point(mut self, rho: f64) -> Self {
        self.match_point = rho;
        self
    }

    pub fn pencil(&self, lambda: Complex64) -> Pencil {
        Pencil::with_fault(lambda, self.fault)
    }

    fn solver(&self) -> Dopri5 {
        Dopri5::with_tolerances(self.rtol, self.atol)
    }

    /// The closed-form gauge solution applies on both sides.
    fn is_gauge(&self, lambda: Complex64) -> bool {
        self.fault.is_none() && lambda == Complex64::new(1.0, 0.0)
    }
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.re > 0.0) || !lambda.im.is_finite() {
        return Err(ModeError::Domain {
            name: "Re lambda",
            value: lambda.re,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

fn theta_state(rho: f64) -> State {
    [
        Complex64::new(theta(rho), 0.0),
        Complex64::new(theta_prime(rho), 0.0),
    ]
}

/// `(φ₀, φ₀')` at each of `points` (ascending, in `[0, 1)`), with integrator
/// statistics.
pub fn phi0_profile(
    lambda: Complex64,
    points: &[f64],
    config: &ShootingConfig,
) -> Result<(Vec<State>, Stats)> {
    check_lambda(lambda)?;
    if let Some(&bad) = points.iter().find(|p| !(0.0..1.0).contains(*p)) {
        return Err(ModeError::Domain {
            name: "rho",
            value: bad,
            domain: "[0, 1)",
        });
    }
    if config.is_gauge(lambda) {
        return Ok((
            points.iter().map(|&r| theta_state(r)).collect(),
            Stats::default(),
        ));
    }
    let pencil = config.pencil(lambda);
    let series = series_phi0_for(&pencil, config.order)?;
    let split = points.partition_point(|&p| p <= config.delta0);
    let mut out = Vec::with_capacity(points.len());
    for &p in &points[..split] {
        let (u, du) = series.eval(p)?;
        out.push([u, du]);
    }
    let (u0, du0) = series.eval(config.delta0)?;
    let (rest, stats) = config.solver().solve(
        |x, y| [y[1], pencil.rhs(x, y[0], y[1])],
        config.delta0,
        [u0, du0],
        &points[split..],
    )?;
    out.extend(rest);
    Ok((out, stats))
}

/// `(φ₁, φ₁')` at each of `points` (descending, in `(0, 1]`).
pub fn phi1_profile(
    lambda: Complex64,
    points: &[f64],
    config: &ShootingConfig,
) -> Result<(Vec<State>, Stats)> {
    check_lambda(lambda)?;
    if let Some(&bad) = points.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(ModeError::Domain {
            name: "rho",
            value: bad,
            domain: "(0, 1]",
        });
    }
    if config.is_gauge(lambda) {
        return Ok((
            points.iter().map(|&r| theta_state(r)).collect(),
            Stats::default(),
        ));
    }
    let pencil = config.pencil(lambda);
    let series = series_phi1_for(&pencil, config.order)?;
    let launch = 1.0 - config.delta1;
    let split = points.partition_point(|&p| p >= launch);
    let mut out = Vec::with_capacity(points.len());
    for &p in &points[..split] {
        let (u, du) = series.eval_local(1.0 - p)?;
        out.push([u, du]);
    }
    let (u1, du1) = series.eval_local(config.delta1)?;
    let (rest, stats) = config.solver().solve(
        |x, y| [y[1], pencil.rhs(x, y[0], y[1])],
        launch,
        [u1, du1],
        &points[split..],
    )?;
    out.extend(rest);
    Ok((out, stats))
}

/// `(φ₀, φ₀')` at `rho`.
pub fn phi0_at(
    lambda: Complex64,
    rho: f64,
    config: &ShootingConfig,
) -> Result<(Complex64, Complex64)> {
    let (s, _) = phi0_profile(lambda, &[rho], config)?;
    Ok((s[0][0], s[0][1]))
}

/// `(φ₁, φ₁')` at `rho`.
pub fn phi1_at(
    lambda: Complex64,
    rho: f64,
    config: &ShootingConfig,
) -> Result<(Complex64, Complex64)> {
    let (s, _) = phi1_profile(lambda, &[rho], config)?;
    Ok((s[0][0], s[0][1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    EigenvalueCandidate,
    NoEigenvalue,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionResult {
    pub lambda: Complex64,
    pub match_point: f64,
    /// `W(φ₀,φ₁)(ρ_m) = φ₀φ₁' - φ₀'φ₁`.
    pub wronskian: Complex64,
    /// `(|φ₀| + |φ₀'|)(|φ₁| + |φ₁'|)` at `ρ_m`.
    pub normalization: f64,
    pub normalized_miss: Complex64,
    /// `W ρ²(1-ρ²)^λ`, independent of the matching point by Abel's identity.
    pub abel_wronskian: Complex64,
    pub classification: Classification,
    /// Right-hand-side evaluations spent by the integrator.
    pub evaluations: usize,
}

/// Connection data of the two one-sided regular solutions at `config.match_point`.
pub fn miss(lambda: Complex64, config: &ShootingConfig) -> Result<ConnectionResult> {
    config.validate()?;
    let rho = config.match_point;
    let (a, s0) = phi0_profile(lambda, &[rho], config)?;
    let (b, s1) = phi1_profile(lambda, &[rho], config)?;
    let [u0, du0] = a[0];
    let [u1, du1] = b[0];
    let wronskian = u0 * du1 - du0 * u1;
    let normalization = (u0.norm() + du0.norm()) * (u1.norm() + du1.norm());
    let abel_wronskian = wronskian * (rho * rho) * (lambda * (1.0 - rho * rho).ln()).exp();
    let (normalized_miss, classification) =
        if normalization > f64::MIN_POSITIVE && normalization.is_finite() {
            let m = wronskian / normalization;
            let class = if m.norm() < config.miss_tolerance {
                Classification::EigenvalueCandidate
            } else {
                Classification::NoEigenvalue
            };
            (m, class)
        } else {
            (
                Complex64::new(f64::NAN, f64::NAN),
                Classification::Indeterminate,
            )
        };
    Ok(ConnectionResult {
        lambda,
        match_point: rho,
        wronskian,
        normalization,
        normalized_miss,
        abel_wronskian,
        classification,
        evaluations: s0.evaluations + s1.evaluations,
    })
}

fn real_miss(lambda: f64, config: &ShootingConfig) -> Result<(f64, usize)> {
    let r = miss(Complex64::new(lambda, 0.0), config)?;
    if r.classification == Classification::Indeterminate {
        return Err(ModeError::Integrator {
            rho: config.match_point,
            reason: "normalization underflow",
        });
    }
    Ok((r.normalized_miss.re, r.evaluations))
}

/// Moves integer values other than 1 off the log-branch points.
pub fn nudge(lambda: f64) -> f64 {
    if lambda.fract() == 0.0 && lambda != 1.0 {
        lambda + INTEGER_NUDGE
    } else {
        lambda
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub lambda: f64,
    pub normalized_miss: Option<f64>,
    pub abel_wronskian: Option<f64>,
    pub classification: Option<Classification>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedRoot {
    pub lambda: f64,
    /// Half-width of the final bracket.
    pub error_bar: f64,
    pub bracket: (f64, f64),
    pub normalized_miss: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub miss_evaluations: usize,
    pub integrator_evaluations: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<ScanPoint>,
    /// Grid intervals over which the normalized miss changes sign.
    pub sign_changes: Vec<(f64, f64)>,
    pub roots: Vec<RefinedRoot>,
    pub metadata: ScanMetadata,
}

impl ScanReport {
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ModeError::Config(e.to_string()))?;
    Ok(pool.install(job))
}

fn bisect(
    a: f64,
    b: f64,
    fa: f64,
    config: &ShootingConfig,
    evals: &mut (usize, usize),
) -> Result<RefinedRoot> {
    let (mut lo, mut hi, mut flo) = (a, b, fa);
    let mut fmid = f64::NAN;
    while hi - lo > REFINE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let (fm, e) = real_miss(mid, config)?;
        evals.0 += 1;
        evals.1 += e;
        fmid = fm;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(RefinedRoot {
        lambda: 0.5 * (lo + hi),
        error_bar: 0.5 * (hi - lo),
        bracket: (a, b),
        normalized_miss: fmid,
    })
}

/// Evaluates the normalized miss on `n` equispaced points of
/// `[lo, hi]`, then refines every sign change by bisection.
pub fn scan_real(lo: f64, hi: f64, n: usize, config: &ShootingConfig) -> Result<ScanReport> {
    config.validate()?;
    if !(lo > 0.0 && hi > lo) {
        return Err(ModeError::Config(format!(
            "scan interval must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(ModeError::Config("scan needs at least two points".into()));
    }
    let grid: Vec<f64> = (0..n)
        .map(|k| nudge(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect();

    let evaluated: Vec<(ScanPoint, usize)> = with_workers(config.workers, || {
        grid.par_iter()
            .map(|&lambda| match miss(Complex64::new(lambda, 0.0), config) {
                Ok(r) if r.classification != Classification::Indeterminate => (
                    ScanPoint {
                        lambda,
                        normalized_miss: Some(r.normalized_miss.re),
                        abel_wronskian: Some(r.abel_wronskian.re),
                        classification: Some(r.classification),
                        error: None,
                    },
                    r.evaluations,
                ),
                Ok(r) => (
                    ScanPoint {
                        lambda,
                        normalized_miss: None,
                        abel_wronskian: Some(r.abel_wronskian.re),
                        classification: Some(r.classification),
                        error: Some("normalization underflow".into()),
                    },
                    r.evaluations,
                ),
                Err(e) => (
                    ScanPoint {
                        lambda,
                        normalized_miss: None,
                        abel_wronskian: None,
                        classification: None,
                        error: Some(e.to_string()),
                    },
                    0,
                ),
            })
            .collect()
    })?;

    let mut metadata = ScanMetadata {
        miss_evaluations: grid.len(),
        ..ScanMetadata::default()
    };
    let mut points = Vec::with_capacity(n);
    for (p, e) in evaluated {
        metadata.integrator_evaluations += e;
        if p.error.is_some() {
            metadata.failures += 1;
        }
        points.push(p);
    }

    let mut sign_changes = Vec::new();
    let mut roots = Vec::new();
    let mut k = 0;
    while k < points.len() {
        let Some(v) = points[k].normalized_miss else {
            k += 1;
            continue;
        };
        if v == 0.0 {
            let l = points[k].lambda;
            roots.push(RefinedRoot {
                lambda: l,
                error_bar: 0.0,
                bracket: (l, l),
                normalized_miss: 0.0,
            });
            // the neighbouring intervals share this root
            k += 2;
            continue;
        }
        if let Some(w) = points.get(k + 1).and_then(|p| p.normalized_miss) {
            if w != 0.0 && (v > 0.0) != (w > 0.0) {
                sign_changes.push((points[k].lambda, points[k + 1].lambda));
            }
        }
        k += 1;
    }

    let refined: Vec<Result<(RefinedRoot, (usize, usize))>> = with_workers(config.workers, || {
        sign_changes
            .par_iter()
            .map(|&(a, b)| {
                let fa = points
                    .iter()
                    .find(|p| p.lambda == a)
                    .and_then(|p| p.normalized_miss)
                    .unwrap_or(f64::NAN);
                let mut evals = (0, 0);
                bisect(a, b, fa, config, &mut evals).map(|r| (r, evals))
            })
            .collect()
    })?;
    for r in refined {
        let (root, (m, e)) = r?;
        metadata.miss_evaluations += m;
        metadata.integrator_evaluations += e;
        roots.push(root);
    }
    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    Ok(ScanReport {
        lo,
        hi,
        points,
        sign_changes,
        roots,
        metadata,
    })
}

/// Axis-aligned rectangle in the λ plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rectangle {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self {
            re_lo: re.0,
            re_hi: re.1,
            im_lo: im.0,
            im_hi: im.1,
        }
    }

    pub fn area(&self) -> f64 {
        (self.re_hi - self.re_lo) * (self.im_hi - self.im_lo)
    }

    /// Counter-clockwise boundary with `n_per_side` points per side, closed
    /// (first point repeated at the end).
    pub fn boundary(&self, n_per_side: usize) -> Vec<Complex64> {
        let corners = [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ];
        let mut out = Vec::with_capacity(4 * n_per_side + 1);
        for side in 0..4 {
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            for k in 0..n_per_side {
                out.push(a + (b - a) * (k as f64 / n_per_side as f64));
            }
        }
        out.push(corners[0]);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub rectangle: Rectangle,
    pub winding: i64,
    /// Total accumulated argument divided by 2π before rounding.
    pub raw_turns: f64,
    pub max_increment: f64,
    pub contour: Vec<(Complex64, Complex64)>,
    pub integrator_evaluations: usize,
}

/// Winding number of the miss function along the rectangle boundary,
/// i.e. the number of enclosed eigenvalues counted with multiplicity.
pub fn scan_complex(
    rect: Rectangle,
    n_per_side: usize,
    config: &ShootingConfig,
) -> Result<WindingReport> {
    config.validate()?;
    if rect.area() == 0.0 {
        return Ok(WindingReport {
            rectangle: rect,
            winding: 0,
            raw_turns: 0.0,
            max_increment: 0.0,
            contour: Vec::new(),
            integrator_evaluations: 0,
        });
    }
    if !(rect.re_lo > 0.0 && rect.re_hi > rect.re_lo && rect.im_hi > rect.im_lo) {
        return Err(ModeError::Config(
            "rectangle must lie in Re lambda > 0 with positive extent".into(),
        ));
    }
    if n_per_side < 2 {
        return Err(ModeError::Config(
            "need at least two points per side".into(),
        ));
    }
    let nodes = rect.boundary(n_per_side);
    let values: Vec<Result<ConnectionResult>> = with_workers(config.workers, || {
        nodes[..nodes.len() - 1]
            .par_iter()
            .map(|&l| miss(l, config))
            .collect()
    })?;
    let mut contour = Vec::with_capacity(nodes.len());
    let mut evaluations = 0;
    for (l, v) in nodes.iter().zip(values) {
        let v = v?;
        evaluations += v.evaluations;
        contour.push((*l, v.wronskian));
    }
    contour.push((nodes[nodes.len() - 1], contour[0].1));

    let mut total = 0.0;
    let mut max_increment: f64 = 0.0;
    for w in contour.windows(2) {
        let d = (w[1].1 / w[0].1).arg();
        if !d.is_finite() {
            return Err(ModeError::ArgumentJump {
                increment: f64::NAN,
            });
        }
        max_increment = max_increment.max(d.abs());
        if d.abs() > FRAC_PI_2 {
            return Err(ModeError::ArgumentJump { increment: d });
        }
        total += d;
    }
    let raw_turns = total / (2.0 * PI);
    Ok(WindingReport {
        rectangle: rect,
        winding: raw_turns.round() as i64,
        raw_turns,
        max_increment,
        contour,
        integrator_evaluations: evaluations,
    })
}
