use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Residual microwave drive leaking through the switch during waits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageModel {
    pub isolation_db: f64,
    /// Nominal π-pulse duration, s.
    pub pi_time: f64,
}

impl Default for LeakageModel {
    fn default() -> Self {
        Self {
            isolation_db: 175.0,
            pi_time: 61.39e-6,
        }
    }
}

impl LeakageModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.isolation_db.is_finite() && self.isolation_db > 0.0) {
            return Err(invalid("isolation_db", format!("{} must be > 0", self.isolation_db)));
        }
        if !(self.pi_time.is_finite() && self.pi_time > 0.0) {
            return Err(invalid("pi_time", format!("{} must be > 0", self.pi_time)));
        }
        Ok(())
    }

    /// Leaked Rabi frequency, rad/s.
    pub fn rabi_frequency(&self) -> f64 {
        PI / self.pi_time * 10f64.powf(-self.isolation_db / 20.0)
    }
}

/// `θ = (π/t_π)·10^(−dB/20)·t`.
pub fn leakage_rotation(model: &LeakageModel, duration: f64) -> Result<f64> {
    model.validate()?;
    if !(duration >= 0.0) {
        return Err(invalid("duration", format!("{duration} must be >= 0")));
    }
    Ok(model.rabi_frequency() * duration)
}

/// Systematic and shot-to-shot relative π-pulse angle errors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseErrorModel {
    pub epsilon_systematic: f64,
    pub epsilon_rms: f64,
}

/// Measured relative pulse error.
pub const MEASURED_PULSE_EPSILON: f64 = 0.0017;

impl PulseErrorModel {
    pub fn new(epsilon_systematic: f64, epsilon_rms: f64) -> Self {
        Self {
            epsilon_systematic,
            epsilon_rms,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon_systematic", self.epsilon_systematic), ("epsilon_rms", self.epsilon_rms)] {
            if !(0.0..=0.1).contains(&v) {
                return Err(invalid(name, format!("{v} outside [0, 0.1]")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.epsilon_systematic == 0.0 && self.epsilon_rms == 0.0
    }
}

/// 1/e time of the pulse-error random walk with one π pulse per `tau`:
/// `2τ/(πε)²`.
pub fn pulse_error_limit(epsilon_rms: f64, tau: f64) -> Result<f64> {
    if !(epsilon_rms > 0.0) {
        return Err(invalid("epsilon_rms", format!("{epsilon_rms} must be > 0")));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("{tau} must be > 0")));
    }
    Ok(2.0 * tau / (PI * epsilon_rms).powi(2))
}
