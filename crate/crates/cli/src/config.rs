use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wavemap_modes::connection::ShootingConfig;
use wavemap_modes::Complex64;

/// Everything needed to reproduce a run; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub lambda: Option<Complex64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: usize,
    pub shooting: ShootingConfig,
    pub picard_tol: Option<f64>,
    pub out: PathBuf,
    pub workers: usize,
}

impl RunConfig {
    /// All problems at once, so a bad invocation is fixed in one round.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(l) = self.lambda {
            if !(l.re > 0.0) || !l.im.is_finite() {
                out.push(format!("lambda = {l} must have positive real part"));
            }
        }
        if let Some(lo) = self.lo {
            if !(lo > 0.0) {
                out.push(format!("--lo = {lo} must be positive"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            if !(hi > lo) {
                out.push(format!("--hi = {hi} must exceed --lo = {lo}"));
            }
        }
        if self.n < 2 {
            out.push(format!("--n = {} must be at least 2", self.n));
        }
        let s = &self.shooting;
        if !(s.match_point > s.delta0 && s.match_point < 1.0 - s.delta1) {
            out.push(format!(
                "--match-point = {} must lie in ({}, {})",
                s.match_point,
                s.delta0,
                1.0 - s.delta1
            ));
        }
        if !(s.rtol > 0.0 && s.rtol < 1.0) {
            out.push(format!("--tol = {} must lie in (0, 1)", s.rtol));
        }
        if let Some(t) = self.picard_tol {
            if !(t > 0.0 && t < 1.0) {
                out.push(format!("--tol = {t} must lie in (0, 1)"));
            }
        }
        out
    }
}
