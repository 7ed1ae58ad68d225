//! Adaptive Dormand–Prince 5(4) integration of a complex two-component
//! first-order system, the form every pencil solve reduces to.

use num_complex::Complex64;

use crate::error::{ModeError, Result};

/// `(u, u')` as a first-order state.
pub type State = [Complex64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size controller settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step as a fraction of the integration span.
    pub initial_fraction: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 200_000,
            initial_fraction: 1e-3,
        }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += k[0] * (h * c);
        out[1] += k[1] * (h * c);
    }
    out
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `y' = f(x, y)` from `(x0, y0)` and returns the state at
    /// each of `outputs`, which must be ordered along the direction of
    /// integration (forward or backward). Steps are clipped so that every
    /// output point is hit exactly.
    pub fn solve<F>(
        &self,
        mut f: F,
        x0: f64,
        y0: State,
        outputs: &[f64],
    ) -> Result<(Vec<State>, Stats)>
    where
        F: FnMut(f64, &State) -> State,
    {
        let mut stats = Stats::default();
        let mut result = Vec::with_capacity(outputs.len());
        let Some(&x_end) = outputs.last() else {
            return Ok((result, stats));
        };
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        for w in outputs.windows(2) {
            if (w[1] - w[0]) * dir < 0.0 {
                return Err(ModeError::Integrator {
                    rho: w[1],
                    reason: "output points not ordered along the integration direction",
                });
            }
        }
        if (outputs[0] - x0) * dir < 0.0 {
            return Err(ModeError::Integrator {
                rho: outputs[0],
                reason: "output point behind the starting point",
            });
        }

        let span = (x_end - x0).abs();
        let mut h = (span * self.initial_fraction).max(1e-12) * dir;
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        stats.evaluations += 1;
        let mut next = 0usize;

        while next < outputs.len() && outputs[next] == x {
            result.push(y);
            next += 1;
        }

        while next < outputs.len() {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(ModeError::Integrator {
                    rho: x,
                    reason: "maximum number of steps exceeded",
                });
            }
            let target = outputs[next];
            if (target - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(target.abs()) {
                result.push(y);
                next += 1;
                continue;
            }
            let planned = h;
            let mut hit = false;
            if (x + h - target) * dir >= 0.0 {
                h = target - x;
                hit = true;
            }
            if h.abs() < 1e-14 * x.abs().max(1e-300) {
                return Err(ModeError::Integrator {
                    rho: x,
                    reason: "step size underflow",
                });
            }

            let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                x + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                x + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let x_new = if hit { target } else { x + h };
            let k7 = f(x_new, &y_new);
            stats.evaluations += 6;

            let mut err_sq = 0.0;
            for i in 0..2 {
                let e =
                    (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                        * h;
                let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / 2.0).sqrt();
            if !err.is_finite() {
                return Err(ModeError::Integrator {
                    rho: x,
                    reason: "non-finite state",
                });
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                stats.accepted += 1;
                x = x_new;
                y = y_new;
                k1 = k7;
                if hit {
                    while next < outputs.len() && outputs[next] == x {
                        result.push(y);
                        next += 1;
                    }
                    // the clip shortened the step, not the error estimate
                    h = if factor >= 1.0 {
                        planned
                    } else {
                        planned * factor
                    };
                } else {
                    h *= factor;
                }
            } else {
                stats.rejected += 1;
                h *= factor.min(1.0);
            }
        }
        Ok((result, stats))
    }
}
