use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::stream;
use super::rng::Purpose;
use crate::error::{invalid, Result};
use crate::quantum::rotation_operator;
use crate::sequence::SequenceStyle;

/// Mean `|P₁ − P_ideal|` of one ion after `n` π pulses from `|0⟩`, where
/// each pulse rotates by `π(1 + ε_sys + ε_rms·ξ)`.
pub fn pulse_train_error<R: Rng + ?Sized>(
    n: usize,
    epsilon_systematic: f64,
    epsilon_rms: f64,
    style: SequenceStyle,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N", "must be >= 1"));
    }
    if shots == 0 {
        return Err(invalid("shots", "must be >= 1"));
    }
    let ideal = if n % 2 == 1 { 1.0 } else { 0.0 };
    let mut total = 0.0;
    for _ in 0..shots {
        let mut amp = [num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.0, 0.0)];
        for k in 0..n {
            let eps = if epsilon_rms > 0.0 {
                epsilon_systematic + epsilon_rms * rng.sample::<f64, _>(StandardNormal)
            } else {
                epsilon_systematic
            };
            let phase = if style == SequenceStyle::Reverse && k % 2 == 1 { PI } else { 0.0 };
            let u = rotation_operator(phase, PI * (1.0 + eps));
            amp = [u[(0, 0)] * amp[0] + u[(0, 1)] * amp[1], u[(1, 0)] * amp[0] + u[(1, 1)] * amp[1]];
        }
        total += (amp[1].norm_sqr() - ideal).abs();
    }
    Ok(total / shots as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Over-rotation before calibration.
    pub epsilon_systematic: f64,
    /// Shot-to-shot relative error.
    pub epsilon_rms: f64,
    /// Per-ion residual after calibrating one global π time; the two ions
    /// sit at `±residual`.
    pub calibration_residual: f64,
    pub shots: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            epsilon_systematic: 0.01,
            epsilon_rms: 1e-3,
            // Half the 0.06 µs spread of the two calibrated 61.4 µs π times.
            calibration_residual: 0.03 / 61.42,
            shots: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCurves {
    pub n: Vec<usize>,
    /// Plain pattern at `ε_sys`.
    pub uncalibrated: Vec<f64>,
    /// Plain pattern at the calibration residual.
    pub calibrated: Vec<f64>,
    /// Reverse pattern at `ε_sys`.
    pub reverse: Vec<f64>,
}

/// Two-ion averaged population error of the three benchmark styles.
pub fn pulse_benchmark(ns: &[usize], cfg: &BenchConfig, seed: u64) -> Result<BenchCurves> {
    let mut out = BenchCurves {
        n: ns.to_vec(),
        uncalibrated: Vec::new(),
        calibrated: Vec::new(),
        reverse: Vec::new(),
    };
    for (i, &n) in ns.iter().enumerate() {
        let run = |slot: u64, ion: u64, eps: f64, style| {
            let mut rng = stream(seed, i as u64, slot * 2 + ion, Purpose::Pulse);
            pulse_train_error(n, eps, cfg.epsilon_rms, style, cfg.shots, &mut rng)
        };
        let r = cfg.calibration_residual;
        let unc = 0.5 * (run(0, 0, cfg.epsilon_systematic, SequenceStyle::Plain)? + run(0, 1, cfg.epsilon_systematic, SequenceStyle::Plain)?);
        let cal = 0.5 * (run(1, 0, r, SequenceStyle::Plain)? + run(1, 1, -r, SequenceStyle::Plain)?);
        let rev = 0.5 * (run(2, 0, cfg.epsilon_systematic, SequenceStyle::Reverse)? + run(2, 1, cfg.epsilon_systematic, SequenceStyle::Reverse)?);
        out.uncalibrated.push(unc);
        out.calibrated.push(cal);
        out.reverse.push(rev);
    }
    Ok(out)
}
