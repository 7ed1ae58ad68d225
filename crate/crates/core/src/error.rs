use thiserror::Error;

/// Errors raised by the mode-stability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("argument {name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("evaluation at singular point rho = {rho}")]
    SingularPoint { rho: f64 },

    #[error("quadrature did not reach tolerance (estimated error {estimate:e} after {intervals} intervals)")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("integrator failed at rho = {rho}: {reason}")]
    Integrator { rho: f64, reason: &'static str },

    #[error("expected exactly one sign change of beta on (0,1), found {found}")]
    RootCount { found: usize },

    #[error("logarithmic branch at rho = 1 for lambda = {lambda}: analytic branch is not given by the exponent-0 recurrence")]
    LogCase { lambda: f64 },

    #[error("series recurrence degenerates at order {order}")]
    RecurrenceDegenerate { order: usize },

    #[error("|rho - center| = {distance} exceeds validity radius {radius}")]
    OutOfRadius { distance: f64, radius: f64 },

    #[error("no contractive interval found (best constant {best:.3})")]
    NotContractive { best: f64 },

    #[error("Picard iteration diverged after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error(
        "Picard iteration did not converge in {iterations} iterations (last difference {last:e})"
    )]
    NoConvergence { iterations: usize, last: f64 },

    #[error("phase increment {increment:.3} rad exceeds pi/2 along the contour; refine the boundary grid")]
    ArgumentJump { increment: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ModeError>;
