use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::NoiseConfig;
use super::engine::{draw, run_trajectory, FinalState, PreparedNoise};
use super::rng::{Purpose, TrajectoryStreams};
use crate::analysis::readout::{
    mean_and_se, mitigated_parity, parity_estimate, post_select, sample_record, single_ion_estimate, ReadoutPipeline,
    ShotRecord,
};
use crate::error::{invalid, Result};
use crate::sequence::{ramsey_dd_sequence_with_phase, SequenceStyle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastCurve {
    pub times: Vec<f64>,
    pub contrast: Vec<f64>,
    pub standard_error: Vec<f64>,
    pub shots_per_point: usize,
}

impl ContrastCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Points with `min ≤ t ≤ max`.
    pub fn window(&self, min: f64, max: f64) -> ContrastCurve {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.times[i] >= min && self.times[i] <= max).collect();
        ContrastCurve {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            contrast: keep.iter().map(|&i| self.contrast[i]).collect(),
            standard_error: keep.iter().map(|&i| self.standard_error[i]).collect(),
            shots_per_point: self.shots_per_point,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Estimator {
    /// One projective measurement per trajectory; binomial statistics.
    #[default]
    Shots,
    /// Exact end-of-sequence expectation value averaged over trajectories.
    Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub times: Vec<f64>,
    pub tau: f64,
    pub style: SequenceStyle,
    #[serde(default)]
    pub analysis_phase: f64,
    /// Trajectories (each one shot for [`Estimator::Shots`]) per point.
    pub samples: usize,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub readout: Option<ReadoutPipeline>,
}

impl CurveSpec {
    pub fn new(times: Vec<f64>, tau: f64, samples: usize, estimator: Estimator) -> Self {
        Self {
            times,
            tau,
            style: SequenceStyle::Reverse,
            analysis_phase: 0.0,
            samples,
            estimator,
            readout: None,
        }
    }
}

/// Parity contrast plus single-ion contrasts `−⟨σz⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub parity: ContrastCurve,
    /// Absent for the phase-only engine.
    pub ion1: Option<ContrastCurve>,
    pub ion2: Option<ContrastCurve>,
    /// Post-selection discard fraction per point (zero without readout).
    pub discard_fraction: Vec<f64>,
}

struct PointEstimate {
    parity: (f64, f64),
    ions: Option<[(f64, f64); 2]>,
    discarded: f64,
}

/// Simulates `spec.times` under `cfg`. Trajectory `j` of point `i` uses
/// only the streams of `(seed, i, j)`.
pub fn contrast_curve(spec: &CurveSpec, cfg: &NoiseConfig, seed: u64) -> Result<CurveSet> {
    if spec.samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    if spec.times.is_empty() {
        return Err(invalid("times", "empty time grid"));
    }
    if let Some(r) = &spec.readout {
        r.validate()?;
    }
    let noise = PreparedNoise::new(cfg)?;
    let mut points = Vec::with_capacity(spec.times.len());
    for (i, &t) in spec.times.iter().enumerate() {
        let seq = ramsey_dd_sequence_with_phase(t, spec.tau, spec.style, spec.analysis_phase)?;
        let finals: Vec<(FinalState, TrajectoryStreams)> = (0..spec.samples as u64)
            .into_par_iter()
            .map(|j| {
                let s = TrajectoryStreams::new(seed, i as u64, j);
                run_trajectory(&seq, &noise, &s).map(|f| (f, s))
            })
            .collect::<Result<_>>()?;
        points.push(match spec.estimator {
            Estimator::Expectation => expectation_point(&finals)?,
            Estimator::Shots => shots_point(&finals, spec.readout.as_ref())?,
        });
    }

    let build = |f: &dyn Fn(&PointEstimate) -> (f64, f64)| {
        let (contrast, standard_error) = points.iter().map(f).unzip();
        ContrastCurve {
            times: spec.times.clone(),
            contrast,
            standard_error,
            shots_per_point: spec.samples,
        }
    };
    let has_ions = points.iter().all(|p| p.ions.is_some());
    Ok(CurveSet {
        parity: build(&|p| p.parity),
        ion1: has_ions.then(|| build(&|p| p.ions.expect("checked")[0])),
        ion2: has_ions.then(|| build(&|p| p.ions.expect("checked")[1])),
        discard_fraction: points.iter().map(|p| p.discarded).collect(),
    })
}

fn expectation_point(finals: &[(FinalState, TrajectoryStreams)]) -> Result<PointEstimate> {
    let n = finals.len();
    let parity = mean_and_se(finals.iter().map(|(f, _)| f.parity), n)?;
    let ions = if finals.iter().all(|(f, _)| f.sigma_z.is_some()) {
        let ion = |k: usize| mean_and_se(finals.iter().map(move |(f, _)| -f.sigma_z.expect("checked")[k]), n);
        Some([ion(0)?, ion(1)?])
    } else {
        None
    };
    Ok(PointEstimate { parity, ions, discarded: 0.0 })
}

fn shots_point(finals: &[(FinalState, TrajectoryStreams)], readout: Option<&ReadoutPipeline>) -> Result<PointEstimate> {
    let records: Vec<ShotRecord> = finals
        .iter()
        .map(|(f, s)| match readout {
            Some(r) => sample_record(&f.probabilities, &r.confusion, &r.ba_model, r.p_misorder, &mut s.rng(Purpose::Readout)),
            None => {
                let k = draw(&f.probabilities, &mut s.rng(Purpose::Measure));
                ShotRecord {
                    yb1_bright: k >> 1 == 1,
                    yb2_bright: k & 1 == 1,
                    ba_count: 0,
                }
            }
        })
        .collect();
    let (kept, discarded) = match readout {
        Some(r) => post_select(&records, r.ba_threshold),
        None => (records, 0.0),
    };
    let mitigation = readout.filter(|r| r.mitigate).map(|r| r.confusion);
    let parity = match &mitigation {
        Some(conf) => {
            let (p, se, _) = mitigated_parity(&kept, conf)?;
            (p, se)
        }
        None => parity_estimate(&kept)?,
    };
    let ions = if finals.iter().all(|(f, _)| f.sigma_z.is_some()) {
        let ion = |k: usize| -> Result<(f64, f64)> {
            let (z, se) = single_ion_estimate(&kept, k + 1)?;
            let (z, se) = match &mitigation {
                Some(conf) => {
                    let c = conf[k];
                    let gain = 1.0 - c.eps01 - c.eps10;
                    (((z - (c.eps10 - c.eps01)) / gain).clamp(-1.0, 1.0), se / gain)
                }
                None => (z, se),
            };
            Ok((-z, se))
        };
        Some([ion(0)?, ion(1)?])
    } else {
        None
    };
    Ok(PointEstimate { parity, ions, discarded })
}
