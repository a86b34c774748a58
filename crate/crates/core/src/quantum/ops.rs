use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{ion_bit, TwoQubitState};
use crate::error::{invalid, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `R_φ(θ) = cos(θ/2)·1 − i·sin(θ/2)·(cos φ·σx + sin φ·σy)`.
pub fn rotation_operator(phase: f64, angle: f64) -> Matrix2<Complex64> {
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    let off_upper = -I * s * Complex64::from_polar(1.0, -phase);
    let off_lower = -I * s * Complex64::from_polar(1.0, phase);
    Matrix2::new(c, off_upper, off_lower, c)
}

/// Kronecker product with ion 1 as the most significant factor.
pub fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// Microwave pulse applied to both ions at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalPulse {
    pub phase: f64,
    pub nominal_angle: f64,
    /// Relative angle errors `(ε₁, ε₂)`: ion `i` is rotated by `θ·(1+ε_i)`.
    pub per_ion_angle_error: (f64, f64),
    pub common_lo_phase_offset: f64,
}

impl GlobalPulse {
    pub fn ideal(phase: f64, angle: f64) -> Self {
        Self {
            phase,
            nominal_angle: angle,
            per_ion_angle_error: (0.0, 0.0),
            common_lo_phase_offset: 0.0,
        }
    }

    pub fn with_errors(mut self, eps1: f64, eps2: f64) -> Self {
        self.per_ion_angle_error = (eps1, eps2);
        self
    }

    pub fn with_lo_offset(mut self, offset: f64) -> Self {
        self.common_lo_phase_offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=TAU).contains(&self.nominal_angle) {
            return Err(invalid("nominal_angle", format!("{} outside [0, 2π]", self.nominal_angle)));
        }
        let (e1, e2) = self.per_ion_angle_error;
        if !(e1.abs() < 0.5 && e2.abs() < 0.5) {
            return Err(invalid("per_ion_angle_error", format!("({e1}, {e2}) must satisfy |ε| < 0.5")));
        }
        if !(self.phase.is_finite() && self.common_lo_phase_offset.is_finite()) {
            return Err(invalid("phase", "non-finite pulse phase"));
        }
        Ok(())
    }

    /// Two-ion unitary `R⊗R` including errors and the LO offset.
    pub fn unitary(&self) -> Matrix4<Complex64> {
        let phase = self.phase + self.common_lo_phase_offset;
        let (e1, e2) = self.per_ion_angle_error;
        let u1 = rotation_operator(phase, self.nominal_angle * (1.0 + e1));
        let u2 = rotation_operator(phase, self.nominal_angle * (1.0 + e2));
        kron(&u1, &u2)
    }
}

pub fn conjugate(state: &TwoQubitState, u: &Matrix4<Complex64>) -> TwoQubitState {
    TwoQubitState::from_matrix_unchecked(u * state.matrix() * u.adjoint())
}

pub fn apply_global_pulse(state: &TwoQubitState, pulse: &GlobalPulse) -> Result<TwoQubitState> {
    pulse.validate()?;
    Ok(conjugate(state, &pulse.unitary()))
}

/// Sign of the differential detuning set by the current ion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HopSign {
    Plus,
    Minus,
}

impl HopSign {
    pub fn value(self) -> f64 {
        match self {
            HopSign::Plus => 1.0,
            HopSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            HopSign::Plus => HopSign::Minus,
            HopSign::Minus => HopSign::Plus,
        }
    }
}

/// Frequency offsets during free evolution, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTerms {
    pub common_detuning: f64,
    /// `δω = ω₁ − ω₂` for the reference ion order.
    pub differential_detuning: f64,
    pub sign: HopSign,
}

impl EvolutionTerms {
    pub fn differential(delta: f64) -> Self {
        Self {
            common_detuning: 0.0,
            differential_detuning: delta,
            sign: HopSign::Plus,
        }
    }

    pub fn common(omega: f64) -> Self {
        Self {
            common_detuning: omega,
            differential_detuning: 0.0,
            sign: HopSign::Plus,
        }
    }

    /// `(ω₁, ω₂)` with `ω_i = common ± sign·δω/2`.
    pub fn ion_frequencies(&self) -> (f64, f64) {
        let half = 0.5 * self.sign.value() * self.differential_detuning;
        (self.common_detuning + half, self.common_detuning - half)
    }
}

/// Diagonal evolution where ion `i` advances the phase of `|1⟩` relative
/// to `|0⟩` by `θ_i`: `ρ_ab → ρ_ab·e^{i(θ(a) − θ(b))}`.
pub fn apply_phases(state: &TwoQubitState, theta1: f64, theta2: f64) -> TwoQubitState {
    let phase_of = |idx: usize| ion_bit(idx, 0) as f64 * theta1 + ion_bit(idx, 1) as f64 * theta2;
    let m = state.matrix();
    let out = Matrix4::from_fn(|r, c| {
        if r == c {
            m[(r, c)]
        } else {
            m[(r, c)] * Complex64::from_polar(1.0, phase_of(r) - phase_of(c))
        }
    });
    TwoQubitState::from_matrix_unchecked(out)
}

pub fn free_evolve(state: &TwoQubitState, terms: &EvolutionTerms, duration: f64) -> Result<TwoQubitState> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid("duration", format!("{duration} must be finite and >= 0")));
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    let (w1, w2) = terms.ion_frequencies();
    Ok(apply_phases(state, w1 * duration, w2 * duration))
}

/// Complete dephasing of one ion (0-based): its single-ion coherences
/// are zeroed and populations are untouched.
pub fn dephase_ion(state: &TwoQubitState, ion: usize) -> TwoQubitState {
    let m = state.matrix();
    let out = Matrix4::from_fn(|r, c| {
        if ion_bit(r, ion) == ion_bit(c, ion) {
            m[(r, c)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TwoQubitState::from_matrix_unchecked(out)
}

/// `P = ⟨σz⊗σz⟩ = p00 + p11 − p01 − p10`.
pub fn parity(state: &TwoQubitState) -> f64 {
    let p = state.populations();
    p[0] + p[3] - p[1] - p[2]
}

/// Reduced single-ion density matrix; `ion` is 1 or 2.
pub fn reduced_state(state: &TwoQubitState, ion: usize) -> Result<Matrix2<Complex64>> {
    let k = ion_index(ion)?;
    let m = state.matrix();
    let mut out = Matrix2::zeros();
    for r in 0..4 {
        for c in 0..4 {
            if ion_bit(r, 1 - k) == ion_bit(c, 1 - k) {
                out[(ion_bit(r, k), ion_bit(c, k))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of ion 1 or 2.
pub fn single_ion_observables(state: &TwoQubitState, ion: usize) -> Result<(f64, f64, f64)> {
    let r = reduced_state(state, ion)?;
    let x = 2.0 * r[(0, 1)].re;
    let y = -2.0 * r[(0, 1)].im;
    let z = (r[(0, 0)] - r[(1, 1)]).re;
    Ok((x, y, z))
}

fn ion_index(ion: usize) -> Result<usize> {
    match ion {
        1 => Ok(0),
        2 => Ok(1),
        _ => Err(invalid("ion", format!("{ion} is not 1 or 2"))),
    }
}

/// `2|⟨01|ρ|10⟩|`, the amplitude of the parity fringe.
pub fn dfs_coherence(state: &TwoQubitState) -> f64 {
    2.0 * state.element(1, 2).norm()
}

/// Relative phase `φ` of the DFS coherence, `⟨01|ρ|10⟩ ∝ e^{−iφ}`.
pub fn dfs_phase(state: &TwoQubitState) -> f64 {
    -state.element(1, 2).arg()
}

/// Ideal `R_φ(θ)⊗R_φ(θ)`.
pub fn global_rotation(phase: f64, angle: f64) -> Matrix4<Complex64> {
    let u = rotation_operator(phase, angle);
    kron(&u, &u)
}

/// Parity after an ideal analysis `R_φa(π/2)` on both ions.
pub fn parity_after_analysis(state: &TwoQubitState, analysis_phase: f64) -> f64 {
    parity(&conjugate(state, &global_rotation(analysis_phase, PI / 2.0)))
}
