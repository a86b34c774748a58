//! Shot synthesis, Ba-count post-selection, confusion-matrix mitigation and
//! parity estimation.
//!
//! Bit convention: qubit state `|1⟩` fluoresces ("bright"). Outcome index
//! is `2·b₁ + b₂` with `b = 1` for bright.

use nalgebra::{Matrix2, Matrix4, Vector4};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DfsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub yb1_bright: bool,
    pub yb2_bright: bool,
    pub ba_count: u64,
}

impl ShotRecord {
    pub fn outcome_index(&self) -> usize {
        (usize::from(self.yb1_bright) << 1) | usize::from(self.yb2_bright)
    }

    /// `(−1)^(b₁+b₂)`.
    pub fn parity(&self) -> f64 {
        if self.yb1_bright == self.yb2_bright {
            1.0
        } else {
            -1.0
        }
    }
}

/// Binary readout channel of one ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionMatrix {
    /// P(read bright | dark).
    pub eps01: f64,
    /// P(read dark | bright).
    pub eps10: f64,
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self { eps01: 0.01, eps10: 0.01 }
    }
}

impl ConfusionMatrix {
    pub const IDENTITY: Self = Self { eps01: 0.0, eps10: 0.0 };

    pub fn new(eps01: f64, eps10: f64) -> Result<Self> {
        let m = Self { eps01, eps10 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps01", self.eps01), ("eps10", self.eps10)] {
            if !(0.0..0.5).contains(&v) {
                return Err(invalid(name, format!("{v} outside [0, 0.5)")));
            }
        }
        Ok(())
    }

    /// Column-stochastic `[[1−ε01, ε10], [ε01, 1−ε10]]` (column = true state).
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(1.0 - self.eps01, self.eps10, self.eps01, 1.0 - self.eps10)
    }

    fn read<R: Rng + ?Sized>(&self, bright: bool, rng: &mut R) -> bool {
        let flip = if bright { self.eps10 } else { self.eps01 };
        if rng.random::<f64>() < flip {
            !bright
        } else {
            bright
        }
    }
}

/// Full two-ion channel `M₁⊗M₂`.
pub fn joint_confusion(confusion: &[ConfusionMatrix; 2]) -> Matrix4<f64> {
    let a = confusion[0].matrix();
    let b = confusion[1].matrix();
    Matrix4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// Poisson means of the Ba fluorescence count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaCountModel {
    pub in_order_mean: f64,
    pub misordered_mean: f64,
}

impl Default for BaCountModel {
    fn default() -> Self {
        Self {
            in_order_mean: 30.0,
            misordered_mean: 1.0,
        }
    }
}

/// Readout settings applied to simulated shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutPipeline {
    pub confusion: [ConfusionMatrix; 2],
    pub ba_model: BaCountModel,
    pub p_misorder: f64,
    pub ba_threshold: u64,
    pub mitigate: bool,
}

impl Default for ReadoutPipeline {
    fn default() -> Self {
        Self {
            confusion: [ConfusionMatrix::default(); 2],
            ba_model: BaCountModel::default(),
            p_misorder: 0.0,
            ba_threshold: 10,
            mitigate: true,
        }
    }
}

impl ReadoutPipeline {
    pub fn validate(&self) -> Result<()> {
        self.confusion.iter().try_for_each(ConfusionMatrix::validate)?;
        validate_ba(&self.ba_model, self.p_misorder)
    }
}

fn validate_ba(ba: &BaCountModel, p_misorder: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_misorder) {
        return Err(invalid("p_misorder", format!("{p_misorder} outside [0, 1]")));
    }
    for (name, v) in [("in_order_mean", ba.in_order_mean), ("misordered_mean", ba.misordered_mean)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(name, format!("{v} must be >= 0")));
        }
    }
    Ok(())
}

fn validate_probabilities(p: &[f64; 4]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(invalid("probabilities", format!("{p:?} is not a probability vector")));
    }
    Ok(())
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

fn draw_outcome<R: Rng + ?Sized>(p: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if u < acc {
            return k;
        }
    }
    // Rounding left `u` above the cumulative sum: take the last likely outcome.
    p.iter().rposition(|&x| x > 0.0).unwrap_or(3)
}

/// One synthetic shot from the true outcome probabilities.
pub fn sample_record<R: Rng + ?Sized>(
    probabilities: &[f64; 4],
    confusion: &[ConfusionMatrix; 2],
    ba: &BaCountModel,
    p_misorder: f64,
    rng: &mut R,
) -> ShotRecord {
    let k = draw_outcome(probabilities, rng);
    let yb1_bright = confusion[0].read(k >> 1 == 1, rng);
    let yb2_bright = confusion[1].read(k & 1 == 1, rng);
    let misordered = p_misorder > 0.0 && rng.random::<f64>() < p_misorder;
    let mean = if misordered { ba.misordered_mean } else { ba.in_order_mean };
    ShotRecord {
        yb1_bright,
        yb2_bright,
        ba_count: poisson(mean, rng),
    }
}

pub fn sample_readout<R: Rng + ?Sized>(
    probabilities: &[f64; 4],
    confusion: &[ConfusionMatrix; 2],
    ba: &BaCountModel,
    p_misorder: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ShotRecord>> {
    validate_probabilities(probabilities)?;
    confusion.iter().try_for_each(ConfusionMatrix::validate)?;
    validate_ba(ba, p_misorder)?;
    Ok((0..n)
        .map(|_| sample_record(probabilities, confusion, ba, p_misorder, rng))
        .collect())
}

/// Keeps records with `ba_count ≥ threshold`; returns them with the
/// discarded fraction (0 for empty input).
pub fn post_select(records: &[ShotRecord], ba_threshold: u64) -> (Vec<ShotRecord>, f64) {
    if records.is_empty() {
        return (Vec::new(), 0.0);
    }
    let kept: Vec<ShotRecord> = records.iter().copied().filter(|r| r.ba_count >= ba_threshold).collect();
    let discarded = (records.len() - kept.len()) as f64 / records.len() as f64;
    (kept, discarded)
}

pub fn frequencies(records: &[ShotRecord]) -> Result<[f64; 4]> {
    if records.is_empty() {
        return Err(DfsError::EmptyInput("shot records"));
    }
    let mut f = [0.0; 4];
    for r in records {
        f[r.outcome_index()] += 1.0;
    }
    let n = records.len() as f64;
    Ok(f.map(|x| x / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub probabilities: [f64; 4],
    /// `M⁻¹·observed` before any clipping.
    pub unclipped: [f64; 4],
    pub clipped: bool,
}

fn inverse_confusion(confusion: &[ConfusionMatrix; 2]) -> Result<Matrix4<f64>> {
    for (i, c) in confusion.iter().enumerate() {
        if 1.0 - c.eps01 - c.eps10 <= 1e-12 {
            return Err(DfsError::SingularConfusion { ion: i + 1 });
        }
    }
    let inv = |c: &ConfusionMatrix| c.matrix().try_inverse().ok_or(DfsError::SingularConfusion { ion: 0 });
    let a = inv(&confusion[0])?;
    let b = inv(&confusion[1])?;
    Ok(Matrix4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)]))
}

/// Inverts `M₁⊗M₂`; negative entries are clipped to zero and the result
/// renormalized, with `clipped` set.
pub fn mitigate_readout(observed: &[f64; 4], confusion: &[ConfusionMatrix; 2]) -> Result<Mitigated> {
    let inv = inverse_confusion(confusion)?;
    let raw = inv * Vector4::from_column_slice(observed);
    let unclipped = [raw[0], raw[1], raw[2], raw[3]];
    let clipped = unclipped.iter().any(|&x| x < 0.0);
    let probabilities = if clipped {
        let pos = unclipped.map(|x| x.max(0.0));
        let s: f64 = pos.iter().sum();
        if s > 0.0 {
            pos.map(|x| x / s)
        } else {
            [0.25; 4]
        }
    } else {
        unclipped
    };
    Ok(Mitigated {
        probabilities,
        unclipped,
        clipped,
    })
}

pub fn parity_of(p: &[f64; 4]) -> f64 {
    p[0] + p[3] - p[1] - p[2]
}

/// Mean of `(−1)^(b₁+b₂)` with SE = sample std / √n (SE = 0 for one shot).
pub fn parity_estimate(records: &[ShotRecord]) -> Result<(f64, f64)> {
    mean_and_se(records.iter().map(ShotRecord::parity), records.len())
}

/// `⟨σz⟩ = P(dark) − P(bright)` of ion 1 or 2 with its SE.
pub fn single_ion_estimate(records: &[ShotRecord], ion: usize) -> Result<(f64, f64)> {
    let bit = |r: &ShotRecord| match ion {
        1 => Ok(r.yb1_bright),
        2 => Ok(r.yb2_bright),
        _ => Err(invalid("ion", format!("{ion} is not 1 or 2"))),
    };
    let values = records
        .iter()
        .map(|r| bit(r).map(|b| if b { -1.0 } else { 1.0 }))
        .collect::<Result<Vec<_>>>()?;
    mean_and_se(values.into_iter(), records.len())
}

pub(crate) fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(DfsError::EmptyInput("shot records"));
    }
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Parity of mitigated frequencies with linearly propagated multinomial SE.
pub fn mitigated_parity(records: &[ShotRecord], confusion: &[ConfusionMatrix; 2]) -> Result<(f64, f64, bool)> {
    let f = frequencies(records)?;
    let m = mitigate_readout(&f, confusion)?;
    let inv = inverse_confusion(confusion)?;
    let s = Vector4::new(1.0, -1.0, -1.0, 1.0);
    let v = inv.transpose() * s;
    let fv = Vector4::from_column_slice(&f);
    let cov = (Matrix4::from_diagonal(&fv) - fv * fv.transpose()) / records.len() as f64;
    let var = (v.transpose() * cov * v)[(0, 0)].max(0.0);
    Ok((parity_of(&m.probabilities), var.sqrt(), m.clipped))
}
