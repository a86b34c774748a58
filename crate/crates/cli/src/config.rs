use std::path::Path;

use serde::{Deserialize, Serialize};

use dfs_core::analysis::ReadoutPipeline;
use dfs_core::montecarlo::{BenchConfig, Engine, Estimator, NoiseConfig, DFS_AMPLITUDE};
use dfs_core::sequence::SequenceStyle;

use crate::error::{CliError, CliResult};

/// Top-level run description shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; required by `simulate` and `sweep`.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "NoiseConfig::measured_default")]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sequence: SequenceConfig,
    /// Monte Carlo trajectories per time point.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default)]
    pub readout: Option<ReadoutPipeline>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub bench: BenchSection,
}

fn default_trajectories() -> usize {
    10_000
}

fn default_estimator() -> Estimator {
    Estimator::Expectation
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            noise: NoiseConfig::measured_default(),
            sequence: SequenceConfig::default(),
            trajectories: default_trajectories(),
            estimator: default_estimator(),
            readout: None,
            fit: FitConfig::default(),
            sweep: SweepConfig::default(),
            budget: BudgetConfig::default(),
            bench: BenchSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.noise.validate()?;
        Ok(cfg)
    }

    /// Seed or a schema error naming the missing key.
    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("missing field `seed` (set it in the config or pass --seed)".into()))
    }
}

/// Evolution-time grid, either listed or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl TimeGrid {
    pub fn times(&self) -> CliResult<Vec<f64>> {
        match *self {
            TimeGrid::List(ref v) => Ok(v.clone()),
            TimeGrid::Range { start, stop, step } => {
                if !(step > 0.0 && stop >= start && start >= 0.0) {
                    return Err(CliError::Config(format!(
                        "sequence.times: range {start}..{stop} step {step} is empty or invalid"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    #[serde(default = "default_grid")]
    pub times: TimeGrid,
    /// Echo interval τ, s.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_style")]
    pub style: SequenceStyle,
    #[serde(default)]
    pub analysis_phase: f64,
}

fn default_grid() -> TimeGrid {
    TimeGrid::Range {
        start: 0.0,
        stop: 1600.0,
        step: 200.0,
    }
}

fn default_tau() -> f64 {
    100.0
}

fn default_style() -> SequenceStyle {
    SequenceStyle::Reverse
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            times: default_grid(),
            tau: default_tau(),
            style: default_style(),
            analysis_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Fixed parity amplitude; `null` leaves it free.
    #[serde(default = "default_amplitude")]
    pub amplitude: Option<f64>,
    /// Earliest time included in the fit, s. Skips the initial transient
    /// while common-mode noise dephases the `|00⟩, |11⟩` part.
    #[serde(default = "default_t_min")]
    pub t_min: f64,
}

fn default_amplitude() -> Option<f64> {
    Some(DFS_AMPLITUDE)
}

fn default_t_min() -> f64 {
    30.0
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            amplitude: default_amplitude(),
            t_min: default_t_min(),
        }
    }
}

/// Cartesian grid of hopping-only cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub hop_rates: Vec<f64>,
    pub t_phi: Vec<f64>,
    pub tau: Vec<f64>,
    /// Longest evolution time; each cell uses whole echo blocks up to it.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub engine: Engine,
}

fn default_t_max() -> f64 {
    1600.0
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            hop_rates: vec![6e-4],
            t_phi: vec![1250.0, 1.8],
            tau: vec![100.0],
            t_max: default_t_max(),
            engine: Engine::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Echo interval for the pulse-error entry, s.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Measured Zeeman-qubit coherence projected onto the clock qubit, s.
    #[serde(default = "default_t_zeeman")]
    pub t_zeeman: f64,
    /// Hopping limit; simulated from `noise` when absent.
    #[serde(default)]
    pub hopping_limit: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_t_zeeman() -> f64 {
    145.0
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            t_zeeman: default_t_zeeman(),
            hopping_limit: None,
            t_max: default_t_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    /// Pulse counts to evaluate.
    #[serde(default = "default_bench_n")]
    pub n: Vec<usize>,
    #[serde(default)]
    pub pulses: BenchConfig,
}

fn default_bench_n() -> Vec<usize> {
    (1..=40).collect()
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            n: default_bench_n(),
            pulses: BenchConfig::default(),
        }
    }
}
