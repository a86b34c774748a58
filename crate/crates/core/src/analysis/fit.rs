//! Weighted nonlinear least squares with Levenberg–Marquardt damping.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DfsError, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;
const RANK_TOLERANCE: f64 = 1e-12;
/// Parameters near zero are compared to this scale instead of their own size.
const PARAM_FLOOR: f64 = 1e-6;
/// Per-point χ² below which the data are considered reproduced exactly.
const EXACT_CHI2: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    /// `A·exp(−t/T) + c`, parameters `[A, T, c]`.
    Exponential,
    /// `A·exp(−(t/T)²) + c`, parameters `[A, T, c]`; `c` fixed by default.
    GaussianDecay,
    /// `A·cos(2πt/T_φ + φ₀) + c`, parameters `[A, T_phi, phi0, c]`.
    Cosine,
}

impl DecayModel {
    pub fn n_params(self) -> usize {
        match self {
            DecayModel::Exponential | DecayModel::GaussianDecay => 3,
            DecayModel::Cosine => 4,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            DecayModel::Exponential | DecayModel::GaussianDecay => &["A", "T", "c"],
            DecayModel::Cosine => &["A", "T_phi", "phi0", "c"],
        }
    }

    pub fn default_fixed(self) -> Vec<bool> {
        match self {
            DecayModel::GaussianDecay => vec![false, false, true],
            _ => vec![false; self.n_params()],
        }
    }

    pub fn eval(self, t: f64, p: &[f64]) -> f64 {
        match self {
            DecayModel::Exponential => p[0] * (-t / p[1]).exp() + p[2],
            DecayModel::GaussianDecay => p[0] * (-(t / p[1]).powi(2)).exp() + p[2],
            DecayModel::Cosine => p[0] * (TAU * t / p[1] + p[2]).cos() + p[3],
        }
    }

    fn gradient(self, t: f64, p: &[f64], out: &mut [f64]) {
        match self {
            DecayModel::Exponential => {
                let e = (-t / p[1]).exp();
                out[0] = e;
                out[1] = p[0] * e * t / (p[1] * p[1]);
                out[2] = 1.0;
            }
            DecayModel::GaussianDecay => {
                let e = (-(t / p[1]).powi(2)).exp();
                out[0] = e;
                out[1] = p[0] * e * 2.0 * t * t / p[1].powi(3);
                out[2] = 1.0;
            }
            DecayModel::Cosine => {
                let arg = TAU * t / p[1] + p[2];
                let (s, c) = arg.sin_cos();
                out[0] = c;
                out[1] = p[0] * s * TAU * t / (p[1] * p[1]);
                out[2] = -p[0] * s;
                out[3] = 1.0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub params: Vec<f64>,
    /// Zero for fixed parameters.
    pub sigmas: Vec<f64>,
    pub chi2: f64,
    pub chi2_reduced: f64,
    pub dof: usize,
    pub converged: bool,
    pub iterations: usize,
    pub fixed: Vec<bool>,
    /// Over all parameters; rows and columns of fixed ones are zero.
    pub covariance: Vec<Vec<f64>>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.model.param_names().iter().position(|n| *n == name)?;
        Some((self.params[i], self.sigmas[i]))
    }
}

/// Fit with the model's default fixed-parameter mask.
pub fn fit_model(t: &[f64], y: &[f64], sigma_y: &[f64], model: DecayModel, guess: &[f64]) -> Result<FitResult> {
    fit_model_masked(t, y, sigma_y, model, guess, &model.default_fixed())
}

pub fn fit_model_masked(
    t: &[f64],
    y: &[f64],
    sigma_y: &[f64],
    model: DecayModel,
    guess: &[f64],
    fixed: &[bool],
) -> Result<FitResult> {
    let np = model.n_params();
    if guess.len() != np || fixed.len() != np {
        return Err(invalid("guess", format!("{model:?} takes {np} parameters")));
    }
    if t.len() != y.len() || t.len() != sigma_y.len() {
        return Err(invalid("data", "t, y and sigma_y lengths differ"));
    }
    let free: Vec<usize> = (0..np).filter(|&i| !fixed[i]).collect();
    if free.is_empty() {
        return Err(invalid("fixed", "at least one parameter must be free"));
    }
    if t.len() < free.len() {
        return Err(invalid("data", format!("{} points for {} free parameters", t.len(), free.len())));
    }
    if let Some(s) = sigma_y.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(invalid("sigma_y", format!("{s} must be > 0")));
    }
    if t.iter().chain(y).chain(guess).any(|v| !v.is_finite()) {
        return Err(invalid("data", "non-finite input"));
    }

    let mut p = guess.to_vec();
    if model == DecayModel::Cosine {
        p = cosine_prescan(t, y, sigma_y, &p, fixed);
    }
    let w: Vec<f64> = sigma_y.iter().map(|s| 1.0 / (s * s)).collect();
    let lm = Levenberg { model, t, y, w: &w, free: &free };

    let mut chi2 = lm.chi2(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g) = lm.normal_equations(&p);
        let mut accepted = false;
        while lambda < 1e20 {
            let mut damped = a.clone();
            for k in 0..free.len() {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += step[k];
            }
            let rel = free
                .iter()
                .enumerate()
                .map(|(k, &i)| step[k].abs() / (p[i].abs() + PARAM_FLOOR))
                .fold(0.0, f64::max);
            let trial_chi2 = lm.chi2(&trial);
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                p = trial;
                chi2 = trial_chi2;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < STEP_TOLERANCE || trial_chi2 <= EXACT_CHI2 * t.len() as f64 {
                    converged = true;
                }
                break;
            }
            if rel < STEP_TOLERANCE {
                converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            break;
        }
    }
    lm.finish(p, chi2, converged, iterations, fixed)
}

struct Levenberg<'a> {
    model: DecayModel,
    t: &'a [f64],
    y: &'a [f64],
    w: &'a [f64],
    free: &'a [usize],
}

impl Levenberg<'_> {
    fn chi2(&self, p: &[f64]) -> f64 {
        self.t
            .iter()
            .zip(self.y)
            .zip(self.w)
            .map(|((&t, &y), &w)| w * (y - self.model.eval(t, p)).powi(2))
            .sum()
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let mut grad = vec![0.0; self.model.n_params()];
        let mut j = DMatrix::zeros(self.t.len(), self.free.len());
        for (r, &t) in self.t.iter().enumerate() {
            self.model.gradient(t, p, &mut grad);
            for (k, &i) in self.free.iter().enumerate() {
                j[(r, k)] = grad[i];
            }
        }
        j
    }

    /// `(JᵀWJ, JᵀW r)` over the free parameters.
    fn normal_equations(&self, p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let j = self.jacobian(p);
        let r = DVector::from_iterator(
            self.t.len(),
            self.t.iter().zip(self.y).map(|(&t, &y)| y - self.model.eval(t, p)),
        );
        let wv = DVector::from_column_slice(self.w);
        let wj = DMatrix::from_fn(j.nrows(), j.ncols(), |r, c| j[(r, c)] * wv[r]);
        (j.transpose() * &wj, wj.transpose() * r)
    }

    fn finish(&self, p: Vec<f64>, chi2: f64, converged: bool, iterations: usize, fixed: &[bool]) -> Result<FitResult> {
        let (a, _) = self.normal_equations(&p);
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smax > 0.0) || smin <= RANK_TOLERANCE * smax {
            return Err(DfsError::RankDeficient(format!(
                "condition ratio {:.3e}",
                if smax > 0.0 { smin / smax } else { 0.0 }
            )));
        }
        let cov_free = a
            .try_inverse()
            .ok_or_else(|| DfsError::RankDeficient("normal matrix not invertible".into()))?;
        let np = self.model.n_params();
        let dof = self.t.len() - self.free.len();
        let chi2_reduced = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
        let scale = chi2_reduced.max(1.0);
        let mut covariance = vec![vec![0.0; np]; np];
        for (k, &i) in self.free.iter().enumerate() {
            for (l, &j) in self.free.iter().enumerate() {
                covariance[i][j] = 0.5 * (cov_free[(k, l)] + cov_free[(l, k)]) * scale;
            }
        }
        let sigmas = (0..np).map(|i| covariance[i][i].max(0.0).sqrt()).collect();
        let mut params = p;
        if self.model == DecayModel::Cosine {
            normalize_cosine(&mut params, &mut covariance, fixed);
        }
        Ok(FitResult {
            model: self.model,
            params,
            sigmas,
            chi2,
            chi2_reduced,
            dof,
            converged,
            iterations,
            fixed: fixed.to_vec(),
            covariance,
        })
    }
}

/// Weighted gradient `Jᵀ W r` at `p` over the free parameters.
pub fn gradient_norm(t: &[f64], y: &[f64], sigma_y: &[f64], model: DecayModel, p: &[f64], fixed: &[bool]) -> f64 {
    let free: Vec<usize> = (0..model.n_params()).filter(|&i| !fixed[i]).collect();
    let w: Vec<f64> = sigma_y.iter().map(|s| 1.0 / (s * s)).collect();
    let lm = Levenberg { model, t, y, w: &w, free: &free };
    lm.normal_equations(p).1.norm()
}

/// Grid search over `T_φ ∈ [0.5, 2]×guess`; at each period `A`, `φ₀`, `c`
/// follow from a linear solve. Keeps fixed entries of the guess.
fn cosine_prescan(t: &[f64], y: &[f64], sigma_y: &[f64], guess: &[f64], fixed: &[bool]) -> Vec<f64> {
    if fixed[1] || !(guess[1] > 0.0) {
        return guess.to_vec();
    }
    let linear_free = !fixed[0] && !fixed[2] && !fixed[3];
    if !linear_free {
        return guess.to_vec();
    }
    let n = 400;
    let mut best: Option<(f64, [f64; 4])> = None;
    for k in 0..=n {
        let period = guess[1] * 0.5 * 4f64.powf(k as f64 / n as f64);
        let omega = TAU / period;
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = nalgebra::Vector3::<f64>::zeros();
        for ((&ti, &yi), &si) in t.iter().zip(y).zip(sigma_y) {
            let w = 1.0 / (si * si);
            let row = nalgebra::Vector3::new((omega * ti).cos(), (omega * ti).sin(), 1.0);
            ata += row * row.transpose() * w;
            atb += row * (yi * w);
        }
        let Some(x) = ata.cholesky().map(|c| c.solve(&atb)) else { continue };
        let chi2: f64 = t
            .iter()
            .zip(y)
            .zip(sigma_y)
            .map(|((&ti, &yi), &si)| {
                let f = x[0] * (omega * ti).cos() + x[1] * (omega * ti).sin() + x[2];
                ((yi - f) / si).powi(2)
            })
            .sum();
        let amp = x[0].hypot(x[1]);
        let phi0 = (-x[1]).atan2(x[0]);
        if best.is_none_or(|(c, _)| chi2 < c) {
            best = Some((chi2, [amp, period, phi0, x[2]]));
        }
    }
    best.map_or_else(|| guess.to_vec(), |(_, p)| p.to_vec())
}

/// `A ≥ 0` and `φ₀ ∈ (−π, π]`.
fn normalize_cosine(p: &mut [f64], cov: &mut [Vec<f64>], fixed: &[bool]) {
    if p[0] < 0.0 && !fixed[0] && !fixed[2] {
        p[0] = -p[0];
        p[2] += PI;
        let (head, rest) = cov.split_at_mut(1);
        for (i, row) in rest.iter_mut().enumerate() {
            head[0][i + 1] = -head[0][i + 1];
            row[0] = -row[0];
        }
    }
    if !fixed[2] {
        p[2] = PI - (PI - p[2]).rem_euclid(TAU);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid(n: usize, step: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * step).collect()
    }

    fn noiseless(model: DecayModel, t: &[f64], p: &[f64]) -> Vec<f64> {
        t.iter().map(|&x| model.eval(x, p)).collect()
    }

    #[test]
    fn exact_exponential_recovery() {
        let t = grid(30, 10.0);
        let truth = [0.5, 100.0, 0.0];
        let y = noiseless(DecayModel::Exponential, &t, &truth);
        let sig = vec![0.01; t.len()];
        let fit = fit_model(&t, &y, &sig, DecayModel::Exponential, &[0.4, 70.0, 0.05]).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 0.5).abs() < 1e-9 * 0.5);
        assert!((fit.params[1] - 100.0).abs() < 1e-9 * 100.0);
        assert!(fit.params[2].abs() < 1e-9);
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let t = grid(25, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let y: Vec<f64> = t.iter().map(|&x| (-(x / 8.1f64).powi(2)).exp() + noise.sample(&mut rng)).collect();
        let sig = vec![0.02; t.len()];
        let guess = [0.8, 6.0, 0.0];
        let fixed = DecayModel::GaussianDecay.default_fixed();
        let g0 = gradient_norm(&t, &y, &sig, DecayModel::GaussianDecay, &guess, &fixed);
        let fit = fit_model(&t, &y, &sig, DecayModel::GaussianDecay, &guess).unwrap();
        let g1 = gradient_norm(&t, &y, &sig, DecayModel::GaussianDecay, &fit.params, &fixed);
        assert!(g1 <= 1e-6 * g0, "{g1} vs {g0}");
        assert!(fit.chi2_reduced > 0.3 && fit.chi2_reduced < 3.0);
        assert_eq!(fit.sigmas[2], 0.0);
    }

    #[test]
    fn cosine_recovery_and_normalization() {
        let t = grid(60, 0.1);
        let truth = [0.45, 1.68, -2.5, 0.02];
        let y = noiseless(DecayModel::Cosine, &t, &truth);
        let sig = vec![0.01; t.len()];
        let fit = fit_model(&t, &y, &sig, DecayModel::Cosine, &[0.3, 2.5, 0.0, 0.0]).unwrap();
        for (a, b) in fit.params.iter().zip(truth) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{:?}", fit.params);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let t = grid(5, 1.0);
        let y = vec![1.0; 5];
        assert!(fit_model(&t, &y, &[1.0; 4], DecayModel::Exponential, &[1.0, 1.0, 0.0]).is_err());
        assert!(fit_model(&t, &y, &[0.0; 5], DecayModel::Exponential, &[1.0, 1.0, 0.0]).is_err());
        assert!(fit_model(&t[..2], &y[..2], &[1.0; 2], DecayModel::Exponential, &[1.0, 1.0, 0.0]).is_err());
        assert!(fit_model(&t, &y, &[1.0; 5], DecayModel::Exponential, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn detects_rank_deficiency() {
        // All samples at t = 0: A and c are indistinguishable.
        let t = vec![0.0; 6];
        let y = vec![0.5; 6];
        let r = fit_model(&t, &y, &[0.01; 6], DecayModel::Exponential, &[0.5, 10.0, 0.0]);
        assert!(matches!(r, Err(DfsError::RankDeficient(_))));
    }

    #[test]
    fn uncertainty_scales_with_chi2() {
        let t = grid(40, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = Normal::new(0.0, 0.05).unwrap();
        let y: Vec<f64> = t.iter().map(|&x| 0.5 * (-x / 60.0f64).exp() + n.sample(&mut rng)).collect();
        let fixed = [false, false, true];
        let loose = fit_model_masked(&t, &y, &vec![0.5; 40], DecayModel::Exponential, &[0.5, 50.0, 0.0], &fixed).unwrap();
        let tight = fit_model_masked(&t, &y, &vec![0.05; 40], DecayModel::Exponential, &[0.5, 50.0, 0.0], &fixed).unwrap();
        // Over-stated errors leave χ²_red < 1, so sigmas are not shrunk.
        assert!(loose.chi2_reduced < 1.0);
        assert!(loose.sigmas[1] > 5.0 * tight.sigmas[1]);
        assert!((loose.params[1] - tight.params[1]).abs() < 1e-6 * tight.params[1]);
    }

    fn family() -> impl Strategy<Value = (DecayModel, Vec<f64>, Vec<f64>)> {
        let exp = (0.2f64..1.0, 20.0f64..200.0, -0.2f64..0.2, prop::collection::vec(0.5f64..1.5, 3))
            .prop_map(|(a, t, c, f)| (DecayModel::Exponential, vec![a, t, c], f));
        let gau = (0.2f64..1.0, 3.0f64..15.0, prop::collection::vec(0.5f64..1.5, 3))
            .prop_map(|(a, t, f)| (DecayModel::GaussianDecay, vec![a, t, 0.0], f));
        let cos = (0.2f64..1.0, 1.0f64..4.0, -3.0f64..3.0, -0.2f64..0.2, prop::collection::vec(0.5f64..1.5, 4))
            .prop_map(|(a, tp, ph, c, f)| (DecayModel::Cosine, vec![a, tp, ph, c], f));
        prop_oneof![exp, gau, cos]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn noiseless_recovery_from_perturbed_guess((model, truth, factors) in family()) {
            let t: Vec<f64> = match model {
                DecayModel::Exponential => grid(40, truth[1] / 8.0),
                DecayModel::GaussianDecay => grid(40, truth[1] / 15.0),
                DecayModel::Cosine => grid(80, truth[1] / 16.0),
            };
            let y = noiseless(model, &t, &truth);
            let sig = vec![0.01; t.len()];
            let mut guess: Vec<f64> = truth.iter().zip(&factors).map(|(p, f)| p * f).collect();
            if model == DecayModel::GaussianDecay { guess[2] = 0.0; }
            let fit = fit_model(&t, &y, &sig, model, &guess).unwrap();
            prop_assert!(fit.converged);
            for (i, (a, b)) in fit.params.iter().zip(&truth).enumerate() {
                let scale = if model.param_names()[i] == "c" || model.param_names()[i] == "phi0" { 1.0 } else { b.abs() };
                prop_assert!((a - b).abs() <= 1e-8 * scale, "{model:?} {:?} vs {:?}", fit.params, truth);
            }
        }
    }
}
