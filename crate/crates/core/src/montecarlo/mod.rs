//! Trajectory Monte Carlo under the full noise stack, contrast curves and
//! analytic oracles.

mod bench;
mod config;
mod curve;
mod engine;
mod oracles;
pub mod rng;

pub use bench::{pulse_benchmark, pulse_train_error, BenchConfig, BenchCurves};
pub use config::{Engine, NoiseConfig, Preparation, DEFAULT_CLOCK_PERIOD, DEFAULT_FIELD, SINGLE_ION_COHERENCE};
pub use curve::{contrast_curve, ContrastCurve, CurveSet, CurveSpec, Estimator};
pub use engine::{run_trajectory, simulate_shot, FinalState, PreparedNoise};
pub use oracles::{
    hop_contrast_exact, hop_oracle_fast, hop_oracle_slow, hop_slow_coherence_time, pulse_noise_contrast,
};

use crate::analysis::{fit_model_masked, pooled_standard_error, DecayModel, FitResult};
use crate::error::{invalid, DfsError, Result};

/// DFS contrast ceiling of `ρ_p`.
pub const DFS_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Fixed(f64),
    Free(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceFit {
    pub t: f64,
    pub sigma_t: f64,
    pub fit: FitResult,
}

/// Exponential 1/e time of a contrast curve with zero offset. Every point
/// gets the pooled standard error of the curve as its weight.
pub fn coherence_time(curve: &ContrastCurve, amplitude: Amplitude) -> Result<CoherenceFit> {
    if curve.len() < 3 {
        return Err(invalid("curve", format!("{} points; need at least 3", curve.len())));
    }
    let pooled = pooled_standard_error(&curve.standard_error);
    let sigma = if pooled > 0.0 { pooled } else { 1.0 };
    let weights = vec![sigma; curve.len()];
    let (a, fix_a) = match amplitude {
        Amplitude::Fixed(a) => (a, true),
        Amplitude::Free(a) => (a, false),
    };
    let guess_t = initial_time(curve, a);
    let fit = fit_model_masked(
        &curve.times,
        &curve.contrast,
        &weights,
        DecayModel::Exponential,
        &[a, guess_t, 0.0],
        &[fix_a, false, true],
    )?;
    if !fit.converged {
        return Err(DfsError::NonConvergence {
            iterations: fit.iterations,
            chi2_reduced: fit.chi2_reduced,
        });
    }
    let (t, sigma_t) = (fit.params[1], fit.sigmas[1]);
    if !(t > 0.0 && t.is_finite()) {
        return Err(DfsError::NonConvergence {
            iterations: fit.iterations,
            chi2_reduced: fit.chi2_reduced,
        });
    }
    Ok(CoherenceFit { t, sigma_t, fit })
}

/// `−t/ln(y/A)` at the latest point with `0 < y < A`, else `10·t_max`.
fn initial_time(curve: &ContrastCurve, a: f64) -> f64 {
    let t_max = curve.times.iter().cloned().fold(0.0, f64::max).max(1e-9);
    curve
        .times
        .iter()
        .zip(&curve.contrast)
        .rev()
        .find(|(t, y)| **t > 0.0 && **y > 0.0 && **y < a)
        .map(|(t, y)| -t / (y / a).ln())
        .filter(|g| g.is_finite() && *g > 0.0)
        .unwrap_or(10.0 * t_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(times: Vec<f64>, f: impl Fn(f64) -> f64, se: f64) -> ContrastCurve {
        ContrastCurve {
            contrast: times.iter().map(|&t| f(t)).collect(),
            standard_error: vec![se; times.len()],
            times,
            shots_per_point: 1,
        }
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let times: Vec<f64> = (0..9).map(|i| i as f64 * 200.0).collect();
        let c = curve(times.clone(), |t| (-t / 4321.0f64).exp(), 0.0);
        let fit = coherence_time(&c, Amplitude::Fixed(1.0)).unwrap();
        assert!((fit.t - 4321.0).abs() < 1e-9 * 4321.0);
        let fit = coherence_time(&c, Amplitude::Free(0.8)).unwrap();
        assert!((fit.t - 4321.0).abs() < 1e-9 * 4321.0);
        let dfs = curve(times, |t| 0.5 * (-t / 3.77e4f64).exp(), 0.01);
        let fit = coherence_time(&dfs, Amplitude::Fixed(DFS_AMPLITUDE)).unwrap();
        assert!((fit.t - 3.77e4).abs() < 1e-9 * 3.77e4);
    }

    #[test]
    fn needs_three_points() {
        let c = curve(vec![0.0, 1.0], |t| (-t).exp(), 0.1);
        assert!(coherence_time(&c, Amplitude::Fixed(1.0)).is_err());
    }
}
