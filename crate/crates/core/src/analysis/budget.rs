use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::montecarlo::NoiseConfig;
use crate::noise::{project_clock_coherence, pulse_error_limit, scattering_limit};

/// Recorded leakage-limited coherence time, s.
pub const LEAKAGE_LIMIT: f64 = 8.2e11;
/// Recorded ground-state T₁ limit, s.
pub const T1_LIMIT: f64 = 5e11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetSource {
    Analytic,
    MonteCarlo,
    Recorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub mechanism: String,
    /// Coherence limit, s; `null` in JSON when unbounded.
    pub limit: f64,
    pub source: BudgetSource,
}

/// Coherence limits per mechanism, most detrimental first.
pub fn budget_report(cfg: &NoiseConfig, tau: f64, mc_hopping_limit: f64, t_zeeman: f64) -> Result<Vec<BudgetEntry>> {
    if !(mc_hopping_limit > 0.0) {
        return Err(invalid("mc_hopping_limit", format!("{mc_hopping_limit} must be > 0")));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("{tau} must be > 0")));
    }
    let c = &cfg.constants;
    let magnetic = project_clock_coherence(c, t_zeeman, cfg.environment.b)?;
    let scattering = if cfg.scatter_beams.is_empty() {
        f64::INFINITY
    } else {
        scattering_limit(&cfg.scatter_beams, 2, c)?
    };
    let pulses = if cfg.pulse_errors.epsilon_rms > 0.0 {
        pulse_error_limit(cfg.pulse_errors.epsilon_rms, tau)?
    } else {
        f64::INFINITY
    };
    let entry = |mechanism: &str, limit: f64, source| BudgetEntry {
        mechanism: mechanism.to_string(),
        limit,
        source,
    };
    let entries = vec![
        entry("hopping", mc_hopping_limit, BudgetSource::MonteCarlo),
        entry("magnetic", magnetic, BudgetSource::Analytic),
        entry("scattering", scattering, BudgetSource::Analytic),
        entry("pulses", pulses, BudgetSource::Analytic),
        entry("leakage", LEAKAGE_LIMIT, BudgetSource::Recorded),
        entry("T1", T1_LIMIT, BudgetSource::Recorded),
    ];
    Ok(rank(entries))
}

/// Stable ascending sort by limit, ties broken by label.
pub fn rank(mut entries: Vec<BudgetEntry>) -> Vec<BudgetEntry> {
    entries.sort_by(|a, b| a.limit.total_cmp(&b.limit).then_with(|| a.mechanism.cmp(&b.mechanism)));
    entries
}

pub fn format_budget_table(entries: &[BudgetEntry]) -> String {
    let width = entries.iter().map(|e| e.mechanism.len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:<4} {:<width$} {:>12} {}\n", "rank", "mechanism", "limit_s", "source");
    for (i, e) in entries.iter().enumerate() {
        let limit = if e.limit.is_finite() { format!("{:.4e}", e.limit) } else { "inf".to_string() };
        let _ = writeln!(out, "{:<4} {:<width$} {:>12} {:?}", i + 1, e.mechanism, limit, e.source);
    }
    out
}
