use serde::{Deserialize, Serialize};

use crate::error::{invalid, DfsError, Result};
use crate::noise::{
    calibrate_common_noise, gradient_from_period, HoppingProcess, LeakageModel, MagneticEnvironment, PhysicalConstants,
    PulseErrorModel, QubitKind, ScatterBeam, MEASURED_PULSE_EPSILON, TYPICAL_HOP_RATE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Engine {
    /// Full density-matrix propagation.
    #[default]
    Exact,
    /// DFS phase only; hopping and static gradients.
    PhaseOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Preparation {
    /// Both ions in `|0⟩`; the sequence's first `R₀(π/2)` is applied.
    #[default]
    Ground,
    /// Start from `ρ_p(0)`, skipping the preparation pulse.
    MixedDfs,
}

/// Clock-qubit field used throughout.
pub const DEFAULT_FIELD: f64 = 4.1;
/// Clock-qubit DFS period assumed for the residual gradient, s.
pub const DEFAULT_CLOCK_PERIOD: f64 = 1250.0;
/// Single-ion echo 1/e time that sets the common-field noise, s.
pub const SINGLE_ION_COHERENCE: f64 = 8.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub environment: MagneticEnvironment,
    #[serde(default)]
    pub hopping: HoppingProcess,
    #[serde(default)]
    pub pulse_errors: PulseErrorModel,
    /// Static LO phase offset common to both ions, rad.
    #[serde(default)]
    pub lo_phase_offset: f64,
    /// Per-pulse Gaussian LO phase jitter common to both ions, rad.
    #[serde(default)]
    pub lo_phase_rms: f64,
    /// Common LO detuning, rad/s.
    #[serde(default)]
    pub lo_detuning: f64,
    #[serde(default)]
    pub scatter_beams: Vec<ScatterBeam>,
    #[serde(default)]
    pub leakage: Option<LeakageModel>,
    #[serde(default = "default_kind")]
    pub qubit_kind: QubitKind,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub preparation: Preparation,
}

fn default_kind() -> QubitKind {
    QubitKind::Clock
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            environment: MagneticEnvironment::new(DEFAULT_FIELD, 0.0),
            hopping: HoppingProcess::default(),
            pulse_errors: PulseErrorModel::default(),
            lo_phase_offset: 0.0,
            lo_phase_rms: 0.0,
            lo_detuning: 0.0,
            scatter_beams: Vec::new(),
            leakage: None,
            qubit_kind: QubitKind::Clock,
            engine: Engine::Exact,
            preparation: Preparation::Ground,
        }
    }

    /// Clock qubit in `ρ_p` with a static gradient of DFS period `t_phi`
    /// and Poisson hopping at `rate`; nothing else.
    pub fn hopping_only(t_phi: f64, rate: f64) -> Result<Self> {
        let mut cfg = Self::noiseless();
        cfg.environment.delta_b = if t_phi.is_infinite() {
            0.0
        } else {
            gradient_from_period(QubitKind::Clock, &cfg.constants, DEFAULT_FIELD, t_phi)?
        };
        cfg.hopping = HoppingProcess::new(rate);
        cfg.preparation = Preparation::MixedDfs;
        Ok(cfg)
    }

    /// Full noise stack at the measured operating point.
    pub fn measured_default() -> Self {
        let constants = PhysicalConstants::default();
        let delta_b = gradient_from_period(QubitKind::Clock, &constants, DEFAULT_FIELD, DEFAULT_CLOCK_PERIOD)
            .expect("positive field and period");
        let sigma = calibrate_common_noise(SINGLE_ION_COHERENCE, 1.0, QubitKind::Clock, &constants, DEFAULT_FIELD)
            .expect("valid calibration inputs");
        Self {
            constants,
            environment: MagneticEnvironment::new(DEFAULT_FIELD, delta_b).with_common_noise(sigma, 1.0),
            hopping: HoppingProcess::new(TYPICAL_HOP_RATE),
            pulse_errors: PulseErrorModel::new(0.0, MEASURED_PULSE_EPSILON),
            lo_phase_offset: 0.0,
            lo_phase_rms: 0.0,
            lo_detuning: 0.0,
            scatter_beams: vec![ScatterBeam::cooling_493(), ScatterBeam::repump_650()],
            leakage: Some(LeakageModel::default()),
            qubit_kind: QubitKind::Clock,
            engine: Engine::Exact,
            preparation: Preparation::Ground,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.environment.validate()?;
        self.hopping.validate()?;
        self.pulse_errors.validate()?;
        self.scatter_beams.iter().try_for_each(ScatterBeam::validate)?;
        if let Some(l) = &self.leakage {
            l.validate()?;
        }
        for (name, v) in [
            ("lo_phase_offset", self.lo_phase_offset),
            ("lo_phase_rms", self.lo_phase_rms),
            ("lo_detuning", self.lo_detuning),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.lo_phase_rms < 0.0 {
            return Err(invalid("lo_phase_rms", "must be >= 0"));
        }
        if self.engine == Engine::PhaseOnly {
            self.check_phase_only()?;
        }
        Ok(())
    }

    fn check_phase_only(&self) -> Result<()> {
        let unsupported = |feature: &str| {
            Err(DfsError::UnsupportedByEngine {
                engine: "PhaseOnly",
                feature: feature.to_string(),
            })
        };
        if self.preparation != Preparation::MixedDfs {
            return unsupported("ground-state preparation");
        }
        if !self.pulse_errors.is_noiseless() {
            return unsupported("pulse errors");
        }
        if !self.scatter_beams.is_empty() {
            return unsupported("scattering");
        }
        if self.leakage.is_some() {
            return unsupported("leakage");
        }
        Ok(())
    }
}
