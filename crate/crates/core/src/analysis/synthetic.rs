use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Result};

/// Shot-noise realisation of a ±1-valued observable with mean `truth(t)`
/// at each time: returns `(estimate, standard_error)` per point.
pub fn binomial_curve<R: Rng + ?Sized>(
    times: &[f64],
    truth: impl Fn(f64) -> f64,
    shots: u64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if shots < 2 {
        return Err(invalid("shots", "need at least two shots per point"));
    }
    let n = shots as f64;
    let mut y = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for &t in times {
        let v = truth(t);
        if !(-1.0..=1.0).contains(&v) {
            return Err(invalid("truth", format!("mean {v} outside [-1, 1] at t = {t}")));
        }
        let p = (1.0 + v) / 2.0;
        let k = Binomial::new(shots, p).map_err(|e| invalid("truth", e.to_string()))?.sample(rng) as f64;
        let est = 2.0 * k / n - 1.0;
        y.push(est);
        se.push(((1.0 - est * est) * n / (n - 1.0) / n).max(0.0).sqrt());
    }
    Ok((y, se))
}

/// `sqrt(mean(se²))`: one common uncertainty for every point of a curve.
pub fn pooled_standard_error(se: &[f64]) -> f64 {
    if se.is_empty() {
        return 0.0;
    }
    (se.iter().map(|s| s * s).sum::<f64>() / se.len() as f64).sqrt()
}
