use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Atomic and physical constants used by the frequency and scattering laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Zeeman-qubit sensitivity, Hz/G.
    pub gamma_z: f64,
    /// Second-order clock coefficient, Hz/G².
    pub beta: f64,
    /// Zero-field hyperfine splitting, Hz.
    pub hf_base: f64,
    /// Excited-state linewidth, rad/s.
    pub gamma_p: f64,
    /// Fine-structure splitting, rad/s.
    pub delta_fs: f64,
    /// Qubit resonance wavelength, m.
    pub lambda_0: f64,
    pub planck: f64,
    pub light_speed: f64,
    pub hbar: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        let planck = 6.626_070_15e-34;
        Self {
            gamma_z: 1.4e6,
            beta: 310.8,
            hf_base: 12.642_812_118e9,
            gamma_p: std::f64::consts::TAU * 20e6,
            delta_fs: std::f64::consts::TAU * 100e12,
            lambda_0: 369.5e-9,
            planck,
            light_speed: 299_792_458.0,
            hbar: planck / std::f64::consts::TAU,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_z", self.gamma_z),
            ("beta", self.beta),
            ("hf_base", self.hf_base),
            ("gamma_p", self.gamma_p),
            ("delta_fs", self.delta_fs),
            ("lambda_0", self.lambda_0),
            ("planck", self.planck),
            ("light_speed", self.light_speed),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        Ok(())
    }
}
