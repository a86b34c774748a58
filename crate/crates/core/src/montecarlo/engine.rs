use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{Engine, NoiseConfig, Preparation};
use super::rng::{Purpose, TrajectoryStreams};
use crate::error::{DfsError, Result};
use crate::noise::{
    differential_detuning, field_sensitivity, sample_hop_times, total_rate, OrnsteinUhlenbeck,
};
use crate::quantum::{
    apply_phases, conjugate, dephase_ion, global_rotation, parity, single_ion_observables, GlobalPulse, HopSign,
    TwoQubitState,
};
use crate::sequence::{PulseSequence, Segment};

/// Per-configuration quantities reused by every trajectory.
#[derive(Debug, Clone)]
pub struct PreparedNoise {
    cfg: NoiseConfig,
    /// δω, rad/s.
    delta_omega: f64,
    /// Common-mode angular shift per gauss, rad/(s·G).
    field_to_omega: f64,
    ou: Option<OrnsteinUhlenbeck>,
    /// Scattering rate seen by each ion, Hz.
    scatter_rate: f64,
    /// Leaked Rabi frequency, rad/s.
    leakage_rabi: f64,
}

impl PreparedNoise {
    pub fn new(cfg: &NoiseConfig) -> Result<Self> {
        cfg.validate()?;
        let env = &cfg.environment;
        let ou = (env.common_noise_sigma > 0.0)
            .then(|| OrnsteinUhlenbeck::new(env.common_noise_sigma, env.common_noise_tau_c))
            .transpose()?;
        let scatter_rate = if cfg.scatter_beams.is_empty() {
            0.0
        } else {
            total_rate(&cfg.scatter_beams, &cfg.constants)?
        };
        Ok(Self {
            cfg: cfg.clone(),
            delta_omega: differential_detuning(cfg.qubit_kind, &cfg.constants, env)?,
            field_to_omega: TAU * field_sensitivity(cfg.qubit_kind, &cfg.constants, env.b)?,
            ou,
            scatter_rate,
            leakage_rabi: cfg.leakage.map_or(0.0, |l| l.rabi_frequency()),
        })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.cfg
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }
}

/// End-of-sequence result of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalState {
    /// Outcome probabilities `p00, p01, p10, p11`.
    pub probabilities: [f64; 4],
    pub parity: f64,
    /// `⟨σz⟩` of each ion; absent for the phase-only engine.
    pub sigma_z: Option<[f64; 2]>,
}

fn segments_to_run<'a>(seq: &'a PulseSequence, cfg: &NoiseConfig) -> Result<&'a [Segment]> {
    match cfg.preparation {
        Preparation::Ground => Ok(&seq.segments),
        Preparation::MixedDfs => {
            if !seq.is_ramsey() {
                return Err(DfsError::InvalidSequence(
                    "mixed-DFS preparation needs a Ramsey sequence".into(),
                ));
            }
            Ok(&seq.segments[1..])
        }
    }
}

pub fn run_trajectory(seq: &PulseSequence, noise: &PreparedNoise, streams: &TrajectoryStreams) -> Result<FinalState> {
    seq.validate()?;
    match noise.cfg.engine {
        Engine::Exact => run_exact(seq, noise, streams),
        Engine::PhaseOnly => run_phase_only(seq, noise, streams),
    }
}

fn run_exact(seq: &PulseSequence, noise: &PreparedNoise, streams: &TrajectoryStreams) -> Result<FinalState> {
    let cfg = &noise.cfg;
    let segments = segments_to_run(seq, cfg)?;
    let hops = sample_hop_times(&cfg.hopping, seq.total_wait, &mut streams.rng(Purpose::Hops))?;
    let mut field_rng = streams.rng(Purpose::Field);
    let mut pulse_rng = streams.rng(Purpose::Pulse);
    let mut scatter_rng = streams.rng(Purpose::Scatter);

    let mut state = match cfg.preparation {
        Preparation::Ground => TwoQubitState::ground(),
        Preparation::MixedDfs => TwoQubitState::rho_p(0.0),
    };
    let mut field = noise.ou.map(|ou| ou.stationary(&mut field_rng));
    let mut sign = HopSign::Plus;
    let mut next_hop = 0;
    let mut clock = 0.0;

    let mut evolve = |state: &TwoQubitState, len: f64, sign: HopSign, field: &mut Option<f64>| {
        let mut common = cfg.lo_detuning * len;
        if let (Some(ou), Some(x)) = (noise.ou, field.as_mut()) {
            let (next, integral) = ou.step_with_integral(*x, len, &mut field_rng);
            *x = next;
            common += noise.field_to_omega * integral;
        }
        let half = 0.5 * sign.value() * noise.delta_omega * len;
        apply_phases(state, common + half, common - half)
    };

    for seg in segments {
        match *seg {
            Segment::Wait { duration } => {
                if duration == 0.0 {
                    continue;
                }
                let end = clock + duration;
                let mut from = clock;
                while next_hop < hops.len() && hops[next_hop] <= end {
                    let h = hops[next_hop].max(from);
                    state = evolve(&state, h - from, sign, &mut field);
                    sign = sign.flipped();
                    from = h;
                    next_hop += 1;
                }
                state = evolve(&state, end - from, sign, &mut field);
                clock = end;

                if noise.scatter_rate > 0.0 {
                    let p = -(-noise.scatter_rate * duration).exp_m1();
                    for ion in 0..2 {
                        if scatter_rng.random::<f64>() < p {
                            state = dephase_ion(&state, ion);
                        }
                    }
                }
                if noise.leakage_rabi > 0.0 {
                    state = conjugate(&state, &global_rotation(0.0, noise.leakage_rabi * duration));
                }
            }
            Segment::Pulse { phase, angle } => {
                let pe = &cfg.pulse_errors;
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                    if pe.epsilon_rms > 0.0 {
                        pe.epsilon_systematic + pe.epsilon_rms * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        pe.epsilon_systematic
                    }
                };
                let e1 = draw(&mut pulse_rng);
                let e2 = draw(&mut pulse_rng);
                let lo = if cfg.lo_phase_rms > 0.0 {
                    cfg.lo_phase_offset + cfg.lo_phase_rms * pulse_rng.sample::<f64, _>(StandardNormal)
                } else {
                    cfg.lo_phase_offset
                };
                let pulse = GlobalPulse::ideal(phase, angle).with_errors(e1, e2).with_lo_offset(lo);
                state = conjugate(&state, &pulse.unitary());
            }
        }
    }

    let (_, _, z1) = single_ion_observables(&state, 1)?;
    let (_, _, z2) = single_ion_observables(&state, 2)?;
    Ok(FinalState {
        probabilities: state.probabilities(),
        parity: parity(&state),
        sigma_z: Some([z1, z2]),
    })
}

/// Tracks `φ` with echo sign flipped at π pulses and hop sign flipped at
/// hops; after analysis the parity is `½cos φ`.
fn run_phase_only(seq: &PulseSequence, noise: &PreparedNoise, streams: &TrajectoryStreams) -> Result<FinalState> {
    let cfg = &noise.cfg;
    let segments = segments_to_run(seq, cfg)?;
    let hops = sample_hop_times(&cfg.hopping, seq.total_wait, &mut streams.rng(Purpose::Hops))?;
    let mut phi = 0.0;
    let mut echo = 1.0;
    let mut hop_sign = 1.0;
    let mut next_hop = 0;
    let mut clock = 0.0;
    let last = segments.len().saturating_sub(1);
    for (i, seg) in segments.iter().enumerate() {
        match *seg {
            Segment::Wait { duration } => {
                let end = clock + duration;
                let mut from = clock;
                while next_hop < hops.len() && hops[next_hop] <= end {
                    let h = hops[next_hop].max(from);
                    phi += echo * hop_sign * noise.delta_omega * (h - from);
                    hop_sign = -hop_sign;
                    from = h;
                    next_hop += 1;
                }
                phi += echo * hop_sign * noise.delta_omega * (end - from);
                clock = end;
            }
            Segment::Pulse { angle, .. } if i != last => {
                if (angle - PI).abs() > 1e-12 {
                    return Err(DfsError::UnsupportedByEngine {
                        engine: "PhaseOnly",
                        feature: format!("intermediate pulse of angle {angle}"),
                    });
                }
                echo = -echo;
            }
            Segment::Pulse { .. } => {}
        }
    }
    let p = 0.5 * phi.cos();
    Ok(FinalState {
        probabilities: [(1.0 + p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 + p) / 4.0],
        parity: p,
        sigma_z: None,
    })
}

/// One projective σz measurement of trajectory `index` under `seed`.
pub fn simulate_shot(seq: &PulseSequence, cfg: &NoiseConfig, seed: u64, index: u64) -> Result<(bool, bool)> {
    let noise = PreparedNoise::new(cfg)?;
    let streams = TrajectoryStreams::new(seed, 0, index);
    let fs = run_trajectory(seq, &noise, &streams)?;
    let k = draw(&fs.probabilities, &mut streams.rng(Purpose::Measure));
    Ok((k >> 1 == 1, k & 1 == 1))
}

pub(crate) fn draw<R: Rng + ?Sized>(p: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if u < acc {
            return k;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(3)
}
