use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::PhysicalConstants;
use crate::error::{invalid, DfsError, Result};

/// Off-resonant coolant beam seen by a qubit ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterBeam {
    /// m
    pub wavelength: f64,
    /// W
    pub power: f64,
    /// 1/e² intensity radius, m.
    pub waist: f64,
    /// Ion displacement from the beam axis, m.
    pub ion_offset: f64,
    pub incidence_factor: f64,
}

impl ScatterBeam {
    /// Ba⁺ cooling beam at 493 nm.
    pub fn cooling_493() -> Self {
        Self {
            wavelength: 493e-9,
            power: 220e-6,
            waist: 38e-6,
            ion_offset: 6e-6,
            incidence_factor: FRAC_1_SQRT_2,
        }
    }

    /// Ba⁺ repump beam at 650 nm.
    pub fn repump_650() -> Self {
        Self {
            wavelength: 650e-9,
            power: 90e-6,
            waist: 55e-6,
            ion_offset: 6e-6,
            incidence_factor: FRAC_1_SQRT_2,
        }
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("wavelength", self.wavelength), ("waist", self.waist)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} must be > 0")));
            }
        }
        let non_negative = [("power", self.power), ("ion_offset", self.ion_offset)];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("{v} must be >= 0")));
            }
        }
        if !(self.incidence_factor > 0.0 && self.incidence_factor <= 1.0) {
            return Err(invalid("incidence_factor", format!("{} outside (0, 1]", self.incidence_factor)));
        }
        Ok(())
    }

    /// Intensity at the ion, W/m².
    pub fn intensity(&self) -> f64 {
        let w2 = self.waist * self.waist;
        self.incidence_factor * (2.0 * self.power / (PI * w2)) * (-2.0 * self.ion_offset * self.ion_offset / w2).exp()
    }
}

/// `I_sat = π·h·c·Γ / (3λ₀³)`.
pub fn saturation_intensity(c: &PhysicalConstants) -> f64 {
    PI * c.planck * c.light_speed * c.gamma_p / (3.0 * c.lambda_0.powi(3))
}

/// Detuning of the beam from the qubit D1 line, rad/s (magnitude).
pub fn d1_detuning(beam: &ScatterBeam, c: &PhysicalConstants) -> f64 {
    TAU * c.light_speed * (1.0 / beam.wavelength - 1.0 / c.lambda_0).abs()
}

/// Raman scattering rate `(g²Γ/6)(1/Δ² + 2/(Δ + Δ_fs)²)` with
/// `g = (Γ/2)·√(I/(2I_sat))`.
pub fn scattering_rate(beam: &ScatterBeam, c: &PhysicalConstants) -> Result<f64> {
    beam.validate()?;
    let delta = d1_detuning(beam, c);
    if delta <= 1e-9 * c.gamma_p {
        return Err(invalid("wavelength", "beam is resonant with the qubit line; off-resonant model invalid"));
    }
    Ok(rate_at_intensity(beam.intensity(), delta, c))
}

fn rate_at_intensity(intensity: f64, delta: f64, c: &PhysicalConstants) -> f64 {
    let g2 = (c.gamma_p / 2.0).powi(2) * intensity / (2.0 * saturation_intensity(c));
    g2 * c.gamma_p / 6.0 * (1.0 / (delta * delta) + 2.0 / (delta + c.delta_fs).powi(2))
}

/// `1/(n·ΣΓ)`; unbounded (`f64::INFINITY`) when no light scatters.
pub fn scattering_limit(beams: &[ScatterBeam], n_qubits: usize, c: &PhysicalConstants) -> Result<f64> {
    if beams.is_empty() {
        return Err(DfsError::EmptyInput("scatter beams"));
    }
    if n_qubits == 0 {
        return Err(invalid("n_qubits", "must be >= 1"));
    }
    let total = total_rate(beams, c)?;
    Ok(1.0 / (n_qubits as f64 * total))
}

pub fn total_rate(beams: &[ScatterBeam], c: &PhysicalConstants) -> Result<f64> {
    beams.iter().map(|b| scattering_rate(b, c)).sum()
}

/// Range of the scattering limit when every beam intensity is scaled by
/// `1 ± variation`, as `(low, high)`.
pub fn scattering_limit_band(
    beams: &[ScatterBeam],
    n_qubits: usize,
    c: &PhysicalConstants,
    variation: f64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&variation) {
        return Err(invalid("variation", format!("{variation} outside [0, 1)")));
    }
    let nominal = scattering_limit(beams, n_qubits, c)?;
    Ok((nominal / (1.0 + variation), nominal / (1.0 - variation)))
}
