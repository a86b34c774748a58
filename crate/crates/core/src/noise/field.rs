//! Common-mode field noise as an Ornstein–Uhlenbeck process.
//!
//! The sampler is exact on arbitrary grids: a step of length `Δ` draws the
//! new value and the time integral over the step from their joint Gaussian
//! law, so phase accumulation needs no sub-stepping.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{field_sensitivity, MagneticEnvironment, PhysicalConstants, QubitKind};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrnsteinUhlenbeck {
    pub sigma: f64,
    pub tau_c: f64,
}

impl OrnsteinUhlenbeck {
    pub fn new(sigma: f64, tau_c: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid("sigma", format!("{sigma} must be >= 0")));
        }
        if !(tau_c.is_finite() && tau_c > 0.0) {
            return Err(invalid("tau_c", format!("{tau_c} must be > 0")));
        }
        Ok(Self { sigma, tau_c })
    }

    pub fn stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sigma * rng.sample::<f64, _>(StandardNormal)
    }

    pub fn step<R: Rng + ?Sized>(&self, x: f64, dt: f64, rng: &mut R) -> f64 {
        let rho = (-dt / self.tau_c).exp();
        rho * x + self.sigma * (1.0 - rho * rho).max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal)
    }

    /// Advances by `dt` and returns `(x(t+dt), ∫ x dt')` over the step.
    pub fn step_with_integral<R: Rng + ?Sized>(&self, x: f64, dt: f64, rng: &mut R) -> (f64, f64) {
        if dt <= 0.0 || self.sigma == 0.0 {
            let rho = (-dt.max(0.0) / self.tau_c).exp();
            return (rho * x, x * self.tau_c * (1.0 - rho));
        }
        let tau = self.tau_c;
        let s2 = self.sigma * self.sigma;
        let u = dt / tau;
        let e1 = (-u).exp();
        let e2 = e1 * e1;
        let one_minus_e1 = -(-u).exp_m1();
        let var_x = s2 * -(-2.0 * u).exp_m1();
        // 2u − 3 + 4e^{−u} − e^{−2u} cancels catastrophically for small u.
        let bracket = if u < 1e-3 {
            u * u * u * (2.0 / 3.0 - u / 2.0 + 7.0 * u * u / 30.0)
        } else {
            2.0 * u - 3.0 + 4.0 * e1 - e2
        };
        let var_i = s2 * tau * tau * bracket;
        let cov = s2 * tau * one_minus_e1 * one_minus_e1;

        let mean_x = e1 * x;
        let mean_i = x * tau * one_minus_e1;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let a = var_x.sqrt();
        let (l21, l22) = if a > 0.0 {
            let l21 = cov / a;
            (l21, (var_i - l21 * l21).max(0.0).sqrt())
        } else {
            (0.0, var_i.max(0.0).sqrt())
        };
        (mean_x + a * z1, mean_i + l21 * z1 + l22 * z2)
    }
}

/// Common-mode field offsets (G) at ascending `times`, starting from the
/// stationary law.
pub fn sample_common_field<R: Rng + ?Sized>(env: &MagneticEnvironment, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    env.validate()?;
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(invalid("times", "must be ascending"));
    }
    if env.common_noise_sigma == 0.0 {
        return Ok(vec![0.0; times.len()]);
    }
    let ou = OrnsteinUhlenbeck::new(env.common_noise_sigma, env.common_noise_tau_c)?;
    let mut out = Vec::with_capacity(times.len());
    let mut prev: Option<(f64, f64)> = None;
    for &t in times {
        let x = match prev {
            None => ou.stationary(rng),
            Some((t0, x0)) => ou.step(x0, t - t0, rng),
        };
        out.push(x);
        prev = Some((t, x));
    }
    Ok(out)
}

/// Variance of `∫ f(t)·x(t) dt` for a piecewise-constant filter made of
/// `(duration, sign)` pieces and a unit-variance OU process.
pub fn filtered_phase_variance(tau_c: f64, pieces: &[(f64, f64)]) -> f64 {
    let self_term = |l: f64| 2.0 * tau_c * (l - tau_c * -(-l / tau_c).exp_m1());
    let mut total = 0.0;
    let mut starts = Vec::with_capacity(pieces.len());
    let mut t = 0.0;
    for &(l, _) in pieces {
        starts.push(t);
        t += l;
    }
    for (i, &(li, si)) in pieces.iter().enumerate() {
        total += si * si * self_term(li);
        for (j, &(lj, sj)) in pieces.iter().enumerate().skip(i + 1) {
            let gap = starts[j] - (starts[i] + li);
            let cross = tau_c * tau_c * -(-li / tau_c).exp_m1() * -(-lj / tau_c).exp_m1() * (-gap / tau_c).exp();
            total += 2.0 * si * sj * cross;
        }
    }
    total
}

/// Filter of the single-block echo `[T/4 +, T/2 −, T/4 +]`.
pub fn single_echo_filter(t: f64) -> [(f64, f64); 3] {
    [(t / 4.0, 1.0), (t / 2.0, -1.0), (t / 4.0, 1.0)]
}

/// Common-field rms (G) at correlation time `tau_c` giving a single-ion
/// single-block echo contrast of `1/e` at `t_target`.
///
/// The echo phase is Gaussian with variance linear in σ², so the 1/e
/// condition `var = 2` is solved in closed form.
pub fn calibrate_common_noise(
    t_target: f64,
    tau_c: f64,
    kind: QubitKind,
    constants: &PhysicalConstants,
    b: f64,
) -> Result<f64> {
    if !(t_target > 0.0) {
        return Err(invalid("t_target", format!("{t_target} must be > 0")));
    }
    OrnsteinUhlenbeck::new(0.0, tau_c)?;
    let j = filtered_phase_variance(tau_c, &single_echo_filter(t_target));
    let sigma_omega = (2.0 / j).sqrt();
    Ok(sigma_omega / (TAU * field_sensitivity(kind, constants, b)?))
}
