use thiserror::Error;

/// Errors produced by the solver and its oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point (x = {x}, y = {y}) lies outside the half-space x >= 0")]
    OutsideHalfSpace { x: f64, y: f64 },

    #[error("beta = {beta} is too close to the branch point beta = 1; integrate in u = sqrt(beta - 1) instead")]
    NearBranchPoint { beta: f64 },

    #[error("quadrature did not converge for {term}: error estimate {estimate:e} exceeds tolerance {tolerance:e} after {panels} panels")]
    QuadratureNonConvergence {
        term: String,
        estimate: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error("integrand for {term} returned a non-finite value at {at}")]
    NonFiniteIntegrand { term: String, at: f64 },

    #[error("Talbot inversion did not reach tolerance {tolerance:e} at t = {t} (last two estimates {previous:e}, {current:e})")]
    TalbotNonConvergence {
        t: f64,
        tolerance: f64,
        previous: f64,
        current: f64,
    },

    #[error("finite-difference solver diverged at t = {time}: {reason}")]
    FdDiverged { time: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
