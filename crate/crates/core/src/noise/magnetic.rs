use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PhysicalConstants;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitKind {
    Zeeman,
    Clock,
}

/// Quantizing field, static inter-ion difference and common-mode noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticEnvironment {
    /// Quantizing field, G.
    #[serde(rename = "B")]
    pub b: f64,
    /// Static inter-ion field difference ΔB, G.
    #[serde(rename = "delta_B")]
    pub delta_b: f64,
    /// RMS of the common-mode field fluctuation δB, G.
    #[serde(default)]
    pub common_noise_sigma: f64,
    /// Correlation time of δB, s.
    #[serde(default = "default_tau_c")]
    pub common_noise_tau_c: f64,
}

fn default_tau_c() -> f64 {
    1.0
}

/// Gradient before compensation as quoted alongside the 1.8 s clock period.
pub const DELTA_B_UNCOMPENSATED: f64 = 2.1e-4;
/// Gradient before compensation inferred from the 3.0 ms Zeeman period.
pub const DELTA_B_UNCOMPENSATED_ALT: f64 = 2.4e-4;

impl MagneticEnvironment {
    pub fn new(b: f64, delta_b: f64) -> Self {
        Self {
            b,
            delta_b,
            common_noise_sigma: 0.0,
            common_noise_tau_c: default_tau_c(),
        }
    }

    pub fn with_common_noise(mut self, sigma: f64, tau_c: f64) -> Self {
        self.common_noise_sigma = sigma;
        self.common_noise_tau_c = tau_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(invalid("B", format!("{} must be > 0", self.b)));
        }
        if !(self.delta_b.is_finite() && self.delta_b >= 0.0) {
            return Err(invalid("delta_B", format!("{} must be >= 0", self.delta_b)));
        }
        if !(self.common_noise_sigma.is_finite() && self.common_noise_sigma >= 0.0) {
            return Err(invalid("common_noise_sigma", format!("{} must be >= 0", self.common_noise_sigma)));
        }
        if !(self.common_noise_tau_c.is_finite() && self.common_noise_tau_c > 0.0) {
            return Err(invalid("common_noise_tau_c", format!("{} must be > 0", self.common_noise_tau_c)));
        }
        Ok(())
    }
}

/// `hf_base + β·B²`, Hz.
pub fn clock_frequency(c: &PhysicalConstants, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(invalid("B", format!("{b} must be >= 0")));
    }
    Ok(c.hf_base + c.beta * b * b)
}

/// `2βB·ΔB`, Hz.
pub fn clock_differential(c: &PhysicalConstants, b: f64, delta_b: f64) -> Result<f64> {
    positive_field(b)?;
    Ok(2.0 * c.beta * b * delta_b)
}

/// `γ_Z·ΔB`, Hz.
pub fn zeeman_differential(c: &PhysicalConstants, delta_b: f64) -> f64 {
    c.gamma_z * delta_b
}

/// `γ_Z / (2βB)`.
pub fn sensitivity_ratio(c: &PhysicalConstants, b: f64) -> Result<f64> {
    positive_field(b)?;
    Ok(c.gamma_z / (2.0 * c.beta * b))
}

/// Clock-qubit coherence projected from a Zeeman-qubit measurement.
pub fn project_clock_coherence(c: &PhysicalConstants, t_zeeman: f64, b: f64) -> Result<f64> {
    if !(t_zeeman > 0.0) {
        return Err(invalid("T_zeeman", format!("{t_zeeman} must be > 0")));
    }
    Ok(sensitivity_ratio(c, b)? * t_zeeman)
}

/// Linear field sensitivity `df/dB` of the qubit transition, Hz/G.
pub fn field_sensitivity(kind: QubitKind, c: &PhysicalConstants, b: f64) -> Result<f64> {
    match kind {
        QubitKind::Zeeman => Ok(c.gamma_z),
        QubitKind::Clock => {
            positive_field(b)?;
            Ok(2.0 * c.beta * b)
        }
    }
}

/// Differential frequency between the ions, Hz.
pub fn differential_frequency(kind: QubitKind, c: &PhysicalConstants, b: f64, delta_b: f64) -> Result<f64> {
    Ok(field_sensitivity(kind, c, b)? * delta_b)
}

/// Differential detuning δω in rad/s.
pub fn differential_detuning(kind: QubitKind, c: &PhysicalConstants, env: &MagneticEnvironment) -> Result<f64> {
    Ok(TAU * differential_frequency(kind, c, env.b, env.delta_b)?)
}

/// DFS phase-evolution period `1/Δf`; infinite for a zero gradient.
pub fn period_from_gradient(kind: QubitKind, c: &PhysicalConstants, b: f64, delta_b: f64) -> Result<f64> {
    Ok(1.0 / differential_frequency(kind, c, b, delta_b)?.abs())
}

/// Gradient ΔB that produces the given DFS period.
pub fn gradient_from_period(kind: QubitKind, c: &PhysicalConstants, b: f64, period: f64) -> Result<f64> {
    if !(period > 0.0) {
        return Err(invalid("period", format!("{period} must be > 0")));
    }
    Ok(1.0 / (period * field_sensitivity(kind, c, b)?))
}

fn positive_field(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(invalid("B", format!("{b} must be > 0")));
    }
    Ok(())
}
