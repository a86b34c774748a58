use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Poisson process of Yb–Yb position exchanges.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingProcess {
    /// γ_hop, Hz.
    pub rate: f64,
}

/// Typical exchange rate observed with a three-ion Yb–Ba–Yb crystal.
pub const TYPICAL_HOP_RATE: f64 = 6e-4;

impl HoppingProcess {
    pub fn new(rate: f64) -> Self {
        Self { rate }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(invalid("hopping.rate", format!("{} must be >= 0", self.rate)));
        }
        Ok(())
    }
}

/// Hop times in `[0, T]`, ascending, drawn from exponential gaps.
pub fn sample_hop_times<R: Rng + ?Sized>(process: &HoppingProcess, t: f64, rng: &mut R) -> Result<Vec<f64>> {
    process.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("T", format!("{t} must be finite and >= 0")));
    }
    let mut hops = Vec::new();
    if process.rate == 0.0 || t == 0.0 {
        return Ok(hops);
    }
    let gaps = Exp::new(process.rate).map_err(|e| invalid("hopping.rate", e.to_string()))?;
    let mut now = gaps.sample(rng);
    while now <= t {
        hops.push(now);
        now += gaps.sample(rng);
    }
    Ok(hops)
}
