use crate::error::{Error, Result};
use num_complex::Complex64;

/// `η + σ·√(τ² − |η|²)·iη/|η|`: adds a vector orthogonal to `η` so that
/// `σ = ±1` lands exactly on the circle of radius `τ`.
pub fn pythagoras_lift(eta: Complex64, tau: f64, sigma: f64) -> Result<Complex64> {
    let r = eta.norm();
    if r == 0.0 {
        return Err(Error::DirectionUndefined);
    }
    if r > tau {
        return Err(Error::Precondition(format!("|η| = {r} exceeds τ = {tau}")));
    }
    if !(-1.0..=1.0).contains(&sigma) {
        return Err(Error::Precondition(format!("σ = {sigma} outside [−1, 1]")));
    }
    let h = ((tau - r) * (tau + r)).sqrt();
    Ok(eta + Complex64::i() * eta * (sigma * h / r))
}
