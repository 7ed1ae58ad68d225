//! Numerical mode-stability analysis of the self-similar wave map
//! `f0(ρ) = 2 arctan ρ` from Minkowski space into the three-sphere.
//!
//! The crate decides, to working precision, whether the linearized mode
//! equation admits solutions that are regular on the whole backward light
//! cone `ρ ∈ [0, 1]`. It provides:
//!
//! * [`odecore`]: closed-form background, coefficients, fundamental systems;
//! * [`frobenius`]: power-series solutions at the singular points;
//! * [`connection`]: two-sided shooting, the miss function and spectral scans;
//! * [`picard`]: fixed-point solvers for the two integral equations;
//! * [`stability`]: executable checks of the nonexistence argument.

pub mod connection;
pub mod error;
pub mod frobenius;
pub mod ode;
pub mod odecore;
pub mod panel;
pub mod picard;
pub mod quad;
pub mod stability;

pub use error::{ModeError, Result};
pub use num_complex::Complex64;
