use std::path::{Path, PathBuf};

use serde::Serialize;

use dfs_core::analysis::{
    budget_report, fit_model_masked, format_budget_table, pooled_standard_error, DecayModel, FitResult,
};
use dfs_core::montecarlo::{
    coherence_time, contrast_curve, pulse_benchmark, Amplitude, CoherenceFit, ContrastCurve, CurveSpec, Engine,
    Estimator, NoiseConfig, Preparation, DFS_AMPLITUDE,
};
use dfs_core::noise::{period_from_gradient, MagneticEnvironment};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, Format, Metadata, OutputDir};

pub struct Context {
    pub cfg: RunConfig,
    pub out: OutputDir,
    pub format: Format,
    pub quiet: bool,
}

impl Context {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

#[derive(Serialize)]
struct FitSummary {
    coherence_time_s: f64,
    coherence_time_se_s: f64,
    fit: FitResult,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitOutcome {
    Ok(FitSummary),
    Failed { error: String },
}

fn fit_outcome(r: dfs_core::Result<CoherenceFit>) -> FitOutcome {
    match r {
        Ok(f) => FitOutcome::Ok(FitSummary {
            coherence_time_s: f.t,
            coherence_time_se_s: f.sigma_t,
            fit: f.fit,
        }),
        Err(e) => FitOutcome::Failed { error: e.to_string() },
    }
}

fn amplitude(cfg: &RunConfig, curve: &ContrastCurve) -> Amplitude {
    match cfg.fit.amplitude {
        Some(a) => Amplitude::Fixed(a),
        None => Amplitude::Free(curve.contrast.first().copied().filter(|a| *a > 0.0).unwrap_or(DFS_AMPLITUDE)),
    }
}

fn opt_pair(c: Option<&ContrastCurve>, i: usize) -> [String; 2] {
    c.map_or([String::new(), String::new()], |c| [num(c.contrast[i]), num(c.standard_error[i])])
}

pub fn simulate(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let seed = cfg.require_seed()?;
    let seq = &cfg.sequence;
    let spec = CurveSpec {
        times: seq.times.times()?,
        tau: seq.tau,
        style: seq.style,
        analysis_phase: seq.analysis_phase,
        samples: cfg.trajectories,
        estimator: cfg.estimator,
        readout: cfg.readout.clone(),
    };
    ctx.note(format!("simulating {} points x {} trajectories", spec.times.len(), spec.samples));
    let set = contrast_curve(&spec, &cfg.noise, seed)?;
    let meta = Metadata::new("simulate", Some(seed), cfg);

    if ctx.format.csv() {
        let rows: Vec<Vec<String>> = (0..set.parity.len())
            .map(|i| {
                let mut r = vec![num(set.parity.times[i]), num(set.parity.contrast[i]), num(set.parity.standard_error[i])];
                r.extend(opt_pair(set.ion1.as_ref(), i));
                r.extend(opt_pair(set.ion2.as_ref(), i));
                r.push(num(set.discard_fraction[i]));
                r
            })
            .collect();
        let header = ["t_s", "parity", "parity_se", "ion1", "ion1_se", "ion2", "ion2_se", "discard_fraction"];
        ctx.out.csv("simulate_contrast.csv", &meta, &header, &rows)?;
    }
    if ctx.format.json() {
        ctx.out.json("simulate_contrast.json", &meta, &set)?;
    }
    let window = set.parity.window(cfg.fit.t_min, f64::INFINITY);
    let fit = fit_outcome(coherence_time(&window, amplitude(cfg, &window)));
    if let FitOutcome::Failed { error } = &fit {
        ctx.note(format!("warning: parity fit failed: {error}"));
    }
    ctx.out.json("simulate_fit.json", &meta, &fit)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepCell {
    hop_rate_hz: f64,
    t_phi_s: f64,
    tau_s: f64,
    fit: FitOutcome,
    curve: ContrastCurve,
}

pub fn sweep(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let seed = cfg.require_seed()?;
    let sw = &cfg.sweep;
    if sw.hop_rates.is_empty() || sw.t_phi.is_empty() || sw.tau.is_empty() {
        return Err(CliError::Config("sweep: hop_rates, t_phi and tau must be non-empty".into()));
    }
    let mut cells = Vec::new();
    for &rate in &sw.hop_rates {
        for &t_phi in &sw.t_phi {
            for &tau in &sw.tau {
                if tau.is_nan() || tau <= 0.0 {
                    return Err(CliError::Config(format!("sweep.tau: {tau} must be > 0")));
                }
                let mut noise = NoiseConfig::hopping_only(t_phi, rate)?;
                noise.engine = sw.engine;
                let blocks = (sw.t_max / (2.0 * tau) + 1e-9).floor() as usize;
                let times: Vec<f64> = (0..=blocks).map(|k| k as f64 * 2.0 * tau).collect();
                let spec = CurveSpec::new(times, tau, cfg.trajectories, cfg.estimator);
                ctx.note(format!("cell γ={rate} Hz, T_φ={t_phi} s, τ={tau} s"));
                let curve = contrast_curve(&spec, &noise, seed)?.parity;
                let amp = Amplitude::Fixed(cfg.fit.amplitude.unwrap_or(DFS_AMPLITUDE));
                let fit = fit_outcome(coherence_time(&curve, amp));
                cells.push(SweepCell {
                    hop_rate_hz: rate,
                    t_phi_s: t_phi,
                    tau_s: tau,
                    fit,
                    curve,
                });
            }
        }
    }
    let meta = Metadata::new("sweep", Some(seed), cfg);
    if ctx.format.csv() {
        let rows: Vec<Vec<String>> = cells
            .iter()
            .map(|c| {
                let (t, se, chi2, status) = match &c.fit {
                    FitOutcome::Ok(f) => (f.coherence_time_s, f.coherence_time_se_s, f.fit.chi2_reduced, "ok".to_string()),
                    FitOutcome::Failed { error } => (f64::NAN, f64::NAN, f64::NAN, error.clone()),
                };
                vec![num(c.hop_rate_hz), num(c.t_phi_s), num(c.tau_s), num(t), num(se), num(chi2), status]
            })
            .collect();
        let header = [
            "hop_rate_hz",
            "t_phi_s",
            "tau_s",
            "coherence_time_s",
            "coherence_time_se_s",
            "chi2_reduced",
            "status",
        ];
        ctx.out.csv("sweep.csv", &meta, &header, &rows)?;
    }
    if ctx.format.json() {
        ctx.out.json("sweep.json", &meta, &cells)?;
    }
    Ok(())
}

/// Fitted hopping-limited time for the gradient and hop rate in `noise`.
fn simulated_hopping_limit(ctx: &Context, seed: u64) -> CliResult<f64> {
    let cfg = &ctx.cfg;
    let noise = &cfg.noise;
    if noise.hopping.rate == 0.0 || noise.environment.delta_b == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut h = NoiseConfig::noiseless();
    h.constants = noise.constants;
    h.environment = MagneticEnvironment::new(noise.environment.b, noise.environment.delta_b);
    h.hopping = noise.hopping;
    h.qubit_kind = noise.qubit_kind;
    h.preparation = Preparation::MixedDfs;
    h.engine = Engine::PhaseOnly;
    let tau = cfg.budget.tau;
    let blocks = (cfg.budget.t_max / (2.0 * tau) + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=blocks).map(|k| k as f64 * 2.0 * tau).collect();
    let period = period_from_gradient(noise.qubit_kind, &noise.constants, noise.environment.b, noise.environment.delta_b)?;
    ctx.note(format!("simulating hopping limit: DFS period {period:.1} s, γ = {} Hz", noise.hopping.rate));
    let spec = CurveSpec::new(times, tau, cfg.trajectories, Estimator::Expectation);
    let curve = contrast_curve(&spec, &h, seed)?.parity;
    Ok(coherence_time(&curve, Amplitude::Fixed(DFS_AMPLITUDE))?.t)
}

pub fn budget(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let seed = cfg.seed.unwrap_or(0);
    let hopping = match cfg.budget.hopping_limit {
        Some(h) => h,
        None => simulated_hopping_limit(ctx, seed)?,
    };
    let entries = budget_report(&cfg.noise, cfg.budget.tau, hopping, cfg.budget.t_zeeman)?;
    let meta = Metadata::new("budget", Some(seed), cfg);
    let table = format_budget_table(&entries);
    ctx.out.text("budget.txt", &table)?;
    if !ctx.quiet {
        eprint!("{table}");
    }
    if ctx.format.csv() {
        let rows: Vec<Vec<String>> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| vec![(i + 1).to_string(), e.mechanism.clone(), num(e.limit), format!("{:?}", e.source)])
            .collect();
        ctx.out.csv("budget.csv", &meta, &["rank", "mechanism", "limit_s", "source"], &rows)?;
    }
    if ctx.format.json() {
        ctx.out.json("budget.json", &meta, &entries)?;
    }
    Ok(())
}

pub fn bench_pulses(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let seed = cfg.seed.unwrap_or(0);
    let curves = pulse_benchmark(&cfg.bench.n, &cfg.bench.pulses, seed)?;
    let meta = Metadata::new("bench-pulses", Some(seed), cfg);
    if ctx.format.csv() {
        let rows: Vec<Vec<String>> = (0..curves.n.len())
            .map(|i| {
                vec![
                    curves.n[i].to_string(),
                    num(curves.uncalibrated[i]),
                    num(curves.calibrated[i]),
                    num(curves.reverse[i]),
                ]
            })
            .collect();
        ctx.out.csv("bench_pulses.csv", &meta, &["n_pulses", "uncalibrated", "calibrated", "reverse"], &rows)?;
    }
    if ctx.format.json() {
        ctx.out.json("bench_pulses.json", &meta, &curves)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRequest {
    pub input: PathBuf,
    pub model: DecayModel,
    pub guess: Vec<f64>,
    pub fix: Vec<String>,
    pub y_column: Option<String>,
    pub sigma_column: Option<String>,
    pub pooled_sigma: bool,
}

pub struct Series {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

/// Reads `t` from the first column, `y` from `y_column` (else the second)
/// and `σ` from `sigma_column` (else the third, if any). `#` lines are skipped.
pub fn read_series(path: &Path, y_column: Option<&str>, sigma_column: Option<&str>) -> CliResult<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column named `{name}`", path.display())))
    };
    let y_idx = match y_column {
        Some(n) => find(n)?,
        None => 1,
    };
    let s_idx = match sigma_column {
        Some(n) => Some(find(n)?),
        None => (headers.len() > 2).then_some(2),
    };
    if headers.len() < 2 || y_idx >= headers.len() {
        return Err(CliError::Config(format!("{}: need at least two columns", path.display())));
    }
    let mut out = Series {
        t: Vec::new(),
        y: Vec::new(),
        sigma: s_idx.map(|_| Vec::new()),
    };
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> CliResult<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "{}: line {line}: column `{}`: cannot parse {raw:?} as a number",
                    path.display(),
                    &headers[i]
                ))
            })
        };
        out.t.push(field(0)?);
        out.y.push(field(y_idx)?);
        if let (Some(i), Some(s)) = (s_idx, out.sigma.as_mut()) {
            s.push(field(i)?);
        }
    }
    if out.t.is_empty() {
        return Err(CliError::Config(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

fn default_guess(model: DecayModel, s: &Series) -> Vec<f64> {
    let first = s.y[0];
    let last = *s.y.last().expect("non-empty");
    let span = s.t.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - s.t.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = if span > 0.0 { span } else { 1.0 };
    match model {
        DecayModel::Exponential => vec![first - last, span / 2.0, last],
        DecayModel::GaussianDecay => vec![first, span / 2.0, 0.0],
        DecayModel::Cosine => {
            let mean = s.y.iter().sum::<f64>() / s.y.len() as f64;
            let amp = s.y.iter().map(|y| (y - mean).abs()).fold(0.0, f64::max);
            vec![amp, span / 2.0, 0.0, mean]
        }
    }
}

pub fn fit(req: &FitRequest, out: &OutputDir) -> CliResult<FitResult> {
    let series = read_series(&req.input, req.y_column.as_deref(), req.sigma_column.as_deref())?;
    let names = req.model.param_names();
    let guess = if req.guess.is_empty() {
        default_guess(req.model, &series)
    } else if req.guess.len() == names.len() {
        req.guess.clone()
    } else {
        return Err(CliError::Config(format!(
            "--guess needs {} values ({}), got {}",
            names.len(),
            names.join(", "),
            req.guess.len()
        )));
    };
    let fixed = if req.fix.is_empty() {
        req.model.default_fixed()
    } else {
        let mut f = vec![false; names.len()];
        for name in req.fix.iter().filter(|n| n.as_str() != "none") {
            let i = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CliError::Config(format!("--fix: unknown parameter `{name}`; expected one of {names:?}")))?;
            f[i] = true;
        }
        f
    };
    let mut sigma = series.sigma.clone().unwrap_or_else(|| vec![1.0; series.t.len()]);
    if req.pooled_sigma {
        sigma = vec![pooled_standard_error(&sigma); sigma.len()];
    }
    let result = fit_model_masked(&series.t, &series.y, &sigma, req.model, &guess, &fixed)?;
    let meta = Metadata::new("fit", None, req);
    out.json("fit.json", &meta, &result)?;
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "{} iterations, reduced χ² {:.3}",
            result.iterations, result.chi2_reduced
        )));
    }
    Ok(result)
}
