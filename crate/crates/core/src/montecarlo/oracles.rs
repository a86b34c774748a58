//! Closed-form contrast for hopping dephasing and pulse-error random walks.
//! Contrasts are relative to the `t = 0` value.

use std::f64::consts::TAU;

use crate::error::{invalid, DfsError, Result};

fn check(gamma: f64, t: f64) -> Result<()> {
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", format!("{gamma} must be >= 0")));
    }
    if !(t >= 0.0) {
        return Err(invalid("T", format!("{t} must be >= 0")));
    }
    Ok(())
}

/// Each hop fully randomizes the phase: `exp(−γT)`.
/// Valid for `τ/T_φ > 5`.
pub fn hop_oracle_fast(gamma: f64, tau: f64, t_phi: f64, t: f64) -> Result<f64> {
    check(gamma, t)?;
    if !(tau / t_phi > 5.0) {
        return Err(DfsError::RegimeViolated(format!("fast oracle needs τ/T_φ > 5, got {}", tau / t_phi)));
    }
    Ok((-gamma * t).exp())
}

/// Small per-hop residual: `exp(−γT·a²/6)` with `a = 2πτ/T_φ`.
/// Valid for `a < 1`.
pub fn hop_oracle_slow(gamma: f64, tau: f64, t_phi: f64, t: f64) -> Result<f64> {
    check(gamma, t)?;
    let a = TAU * tau / t_phi;
    if !(a < 1.0) {
        return Err(DfsError::RegimeViolated(format!("slow oracle needs 2πτ/T_φ < 1, got {a}")));
    }
    Ok((-gamma * t * a * a / 6.0).exp())
}

/// 1/e time of [`hop_oracle_slow`]: `6T_φ²/(γ(2πτ)²)`.
pub fn hop_slow_coherence_time(gamma: f64, tau: f64, t_phi: f64) -> f64 {
    6.0 * t_phi * t_phi / (gamma * (TAU * tau).powi(2))
}

/// `exp(−γT(1 − sin a / a))` for hop residuals uniform on `[−a, a]`,
/// `a = δω·τ_eff` with `τ_eff = τ` in multi-block mode and `T/2` for a
/// single short block.
pub fn hop_contrast_exact(gamma: f64, tau: f64, t_phi: f64, t: f64) -> Result<f64> {
    check(gamma, t)?;
    let tau_eff = if t < 2.0 * tau { t / 2.0 } else { tau };
    let a = TAU * tau_eff / t_phi;
    let sinc = if a.abs() < 1e-8 { 1.0 - a * a / 6.0 } else { a.sin() / a };
    Ok((-gamma * t * (1.0 - sinc)).exp())
}

/// `exp(−½N(πε)²)`.
pub fn pulse_noise_contrast(n: usize, epsilon_rms: f64) -> f64 {
    (-0.5 * n as f64 * (std::f64::consts::PI * epsilon_rms).powi(2)).exp()
}
