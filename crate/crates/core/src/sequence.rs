//! Ramsey sequences with reverse-style spin-echo decoupling, and π-pulse
//! trains for calibration benchmarks.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DfsError, Result};
use crate::quantum::global_rotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Segment {
    Wait { duration: f64 },
    Pulse { phase: f64, angle: f64 },
}

impl Segment {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Segment::Wait { duration } if !(duration >= 0.0 && duration.is_finite()) => {
                Err(DfsError::InvalidSequence(format!("wait duration {duration} must be >= 0")))
            }
            Segment::Pulse { angle, .. } if !(angle > 0.0 && angle <= TAU) => {
                Err(DfsError::InvalidSequence(format!("pulse angle {angle} outside (0, 2π]")))
            }
            Segment::Pulse { phase, .. } if !phase.is_finite() => {
                Err(DfsError::InvalidSequence("non-finite pulse phase".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_pi_pulse(&self) -> bool {
        matches!(*self, Segment::Pulse { angle, .. } if (angle - PI).abs() < 1e-12)
    }
}

/// Phase pattern of the π pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceStyle {
    /// Every π pulse at phase 0.
    Plain,
    /// π-pulse phases alternate 0, π, 0, π, …
    Reverse,
}

impl SequenceStyle {
    fn pi_phase(self, index: usize) -> f64 {
        match self {
            SequenceStyle::Plain => 0.0,
            SequenceStyle::Reverse if index % 2 == 1 => PI,
            SequenceStyle::Reverse => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
    pub total_wait: f64,
    pub style: SequenceStyle,
    /// Present for Ramsey sequences, whose first segment is the `R₀(π/2)`
    /// preparation pulse and last segment the analysis pulse.
    pub analysis_phase: Option<f64>,
}

impl PulseSequence {
    pub fn empty() -> Self {
        Self {
            segments: Vec::new(),
            total_wait: 0.0,
            style: SequenceStyle::Plain,
            analysis_phase: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.segments.iter().try_for_each(Segment::validate)
    }

    pub fn is_ramsey(&self) -> bool {
        self.analysis_phase.is_some()
    }

    pub fn waits(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().filter_map(|s| match *s {
            Segment::Wait { duration } => Some(duration),
            Segment::Pulse { .. } => None,
        })
    }

    pub fn pi_pulse_count(&self) -> usize {
        self.segments.iter().filter(|s| s.is_pi_pulse()).count()
    }
}

/// `R₀(π/2)·[blocks]·R_φa(π/2)` with analysis phase 0.
pub fn ramsey_dd_sequence(t: f64, tau: f64, style: SequenceStyle) -> Result<PulseSequence> {
    ramsey_dd_sequence_with_phase(t, tau, style, 0.0)
}

/// Each block is `Wait(τ/2)·π·Wait(τ)·π·Wait(τ/2)`. `T < 2τ` gives one block
/// with `τ = T/2`; `T ≥ 2τ` must be a whole number of blocks.
pub fn ramsey_dd_sequence_with_phase(
    t: f64,
    tau: f64,
    style: SequenceStyle,
    analysis_phase: f64,
) -> Result<PulseSequence> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DfsError::InvalidSequence(format!("evolution time {t} must be >= 0")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(DfsError::InvalidSequence(format!("echo interval {tau} must be > 0")));
    }
    let (blocks, tau_eff) = if t == 0.0 {
        (0, 0.0)
    } else if t < 2.0 * tau {
        (1, t / 2.0)
    } else {
        let ratio = t / (2.0 * tau);
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio {
            return Err(DfsError::InvalidSequence(format!(
                "T = {t} s is not a multiple of 2τ = {} s",
                2.0 * tau
            )));
        }
        (n as usize, tau)
    };

    let mut segments = Vec::with_capacity(5 * blocks + 2);
    segments.push(Segment::Pulse { phase: 0.0, angle: FRAC_PI_2 });
    for b in 0..blocks {
        segments.push(Segment::Wait { duration: tau_eff / 2.0 });
        segments.push(Segment::Pulse { phase: style.pi_phase(2 * b), angle: PI });
        segments.push(Segment::Wait { duration: tau_eff });
        segments.push(Segment::Pulse { phase: style.pi_phase(2 * b + 1), angle: PI });
        segments.push(Segment::Wait { duration: tau_eff / 2.0 });
    }
    segments.push(Segment::Pulse { phase: analysis_phase, angle: FRAC_PI_2 });
    Ok(PulseSequence {
        segments,
        total_wait: t,
        style,
        analysis_phase: Some(analysis_phase),
    })
}

/// `n` back-to-back π pulses.
pub fn pulse_train(n: usize, style: SequenceStyle) -> Result<PulseSequence> {
    if n == 0 {
        return Err(DfsError::InvalidSequence("pulse train needs at least one pulse".into()));
    }
    let segments = (0..n)
        .map(|i| Segment::Pulse { phase: style.pi_phase(i), angle: PI })
        .collect();
    Ok(PulseSequence {
        segments,
        total_wait: 0.0,
        style,
        analysis_phase: None,
    })
}

/// Product of the ideal pulse unitaries, waits treated as identity.
pub fn ideal_net_unitary(seq: &PulseSequence) -> Matrix4<Complex64> {
    seq.segments.iter().fold(Matrix4::identity(), |acc, s| match *s {
        Segment::Pulse { phase, angle } => global_rotation(phase, angle) * acc,
        Segment::Wait { .. } => acc,
    })
}

pub fn pulse_count(seq: &PulseSequence) -> usize {
    seq.segments.iter().filter(|s| matches!(s, Segment::Pulse { .. })).count()
}
