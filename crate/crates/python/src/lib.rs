//! Python bindings: density-matrix states, noise configurations, contrast
//! simulation, fitting and the coherence budget.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dfs_core::analysis::{budget_report, fit_model_masked, DecayModel};
use dfs_core::montecarlo::{
    coherence_time as mc_coherence_time, contrast_curve, pulse_benchmark as mc_pulse_benchmark, Amplitude,
    BenchConfig, ContrastCurve, CurveSpec, Engine, Estimator, Preparation,
};
use dfs_core::noise::{self, PhysicalConstants};
use dfs_core::quantum::{self, EvolutionTerms, GlobalPulse, HopSign, TwoQubitState};
use dfs_core::sequence::SequenceStyle;
use dfs_core::DfsError;

fn py_err(e: DfsError) -> PyErr {
    match e {
        DfsError::NonConvergence { .. } | DfsError::RankDeficient(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Two-ion density matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[pyclass(name = "State", module = "dfs_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: TwoQubitState,
}

#[pymethods]
impl PyState {
    #[staticmethod]
    fn ground() -> Self {
        Self {
            inner: TwoQubitState::ground(),
        }
    }

    #[staticmethod]
    fn rho_p(phi: f64) -> Self {
        Self {
            inner: TwoQubitState::rho_p(phi),
        }
    }

    #[staticmethod]
    fn dfs_bell(phi: f64) -> Self {
        Self {
            inner: TwoQubitState::dfs_bell(phi),
        }
    }

    fn populations(&self) -> [f64; 4] {
        self.inner.populations()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn parity(&self) -> f64 {
        quantum::parity(&self.inner)
    }

    fn dfs_coherence(&self) -> f64 {
        quantum::dfs_coherence(&self.inner)
    }

    fn dfs_phase(&self) -> f64 {
        quantum::dfs_phase(&self.inner)
    }

    #[pyo3(signature = (analysis_phase = 0.0))]
    fn parity_after_analysis(&self, analysis_phase: f64) -> f64 {
        quantum::parity_after_analysis(&self.inner, analysis_phase)
    }

    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of ion 1 or 2.
    fn bloch(&self, ion: usize) -> PyResult<(f64, f64, f64)> {
        quantum::single_ion_observables(&self.inner, ion).map_err(py_err)
    }

    #[pyo3(signature = (phase, angle, eps1 = 0.0, eps2 = 0.0))]
    fn pulse(&self, phase: f64, angle: f64, eps1: f64, eps2: f64) -> PyResult<Self> {
        let p = GlobalPulse::ideal(phase, angle).with_errors(eps1, eps2);
        quantum::apply_global_pulse(&self.inner, &p)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// Free evolution with common and differential detunings in rad/s.
    #[pyo3(signature = (duration, differential = 0.0, common = 0.0, flipped = false))]
    fn evolve(&self, duration: f64, differential: f64, common: f64, flipped: bool) -> PyResult<Self> {
        let terms = EvolutionTerms {
            common_detuning: common,
            differential_detuning: differential,
            sign: if flipped { HopSign::Minus } else { HopSign::Plus },
        };
        quantum::free_evolve(&self.inner, &terms, duration)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn dephase(&self, ion: usize) -> PyResult<Self> {
        if !(1..=2).contains(&ion) {
            return Err(PyValueError::new_err(format!("ion must be 1 or 2, got {ion}")));
        }
        Ok(Self {
            inner: quantum::dephase_ion(&self.inner, ion - 1),
        })
    }

    fn __repr__(&self) -> String {
        let p = self.inner.populations();
        format!("State(populations=[{:.4}, {:.4}, {:.4}, {:.4}])", p[0], p[1], p[2], p[3])
    }
}

/// Noise stack for the trajectory simulator; JSON round-trippable.
#[pyclass(name = "NoiseConfig", module = "dfs_py", skip_from_py_object)]
#[derive(Clone)]
struct PyNoiseConfig {
    inner: dfs_core::montecarlo::NoiseConfig,
}

#[pymethods]
impl PyNoiseConfig {
    #[staticmethod]
    fn measured_default() -> Self {
        Self {
            inner: dfs_core::montecarlo::NoiseConfig::measured_default(),
        }
    }

    #[staticmethod]
    fn noiseless() -> Self {
        Self {
            inner: dfs_core::montecarlo::NoiseConfig::noiseless(),
        }
    }

    #[staticmethod]
    fn hopping_only(t_phi: f64, rate: f64) -> PyResult<Self> {
        dfs_core::montecarlo::NoiseConfig::hopping_only(t_phi, rate)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: dfs_core::montecarlo::NoiseConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// `"exact"` or `"phase_only"`.
    #[getter]
    fn engine(&self) -> &'static str {
        match self.inner.engine {
            Engine::Exact => "exact",
            Engine::PhaseOnly => "phase_only",
        }
    }

    #[setter]
    fn set_engine(&mut self, name: &str) -> PyResult<()> {
        self.inner.engine = match name {
            "exact" => Engine::Exact,
            "phase_only" => Engine::PhaseOnly,
            _ => return Err(PyValueError::new_err(format!("unknown engine {name:?}"))),
        };
        Ok(())
    }

    /// `"ground"` or `"mixed_dfs"`.
    #[getter]
    fn preparation(&self) -> &'static str {
        match self.inner.preparation {
            Preparation::Ground => "ground",
            Preparation::MixedDfs => "mixed_dfs",
        }
    }

    #[setter]
    fn set_preparation(&mut self, name: &str) -> PyResult<()> {
        self.inner.preparation = match name {
            "ground" => Preparation::Ground,
            "mixed_dfs" => Preparation::MixedDfs,
            _ => return Err(PyValueError::new_err(format!("unknown preparation {name:?}"))),
        };
        Ok(())
    }

    #[getter]
    fn hop_rate(&self) -> f64 {
        self.inner.hopping.rate
    }

    #[setter]
    fn set_hop_rate(&mut self, rate: f64) {
        self.inner.hopping.rate = rate;
    }

    fn __repr__(&self) -> String {
        format!(
            "NoiseConfig(engine={:?}, preparation={:?}, hop_rate={})",
            self.engine(),
            self.preparation(),
            self.inner.hopping.rate
        )
    }
}

fn curve_dict<'py>(py: Python<'py>, c: &ContrastCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("times", c.times.clone())?;
    d.set_item("contrast", c.contrast.clone())?;
    d.set_item("standard_error", c.standard_error.clone())?;
    d.set_item("shots_per_point", c.shots_per_point)?;
    Ok(d)
}

fn parse_style(style: &str) -> PyResult<SequenceStyle> {
    match style {
        "plain" => Ok(SequenceStyle::Plain),
        "reverse" => Ok(SequenceStyle::Reverse),
        _ => Err(PyValueError::new_err(format!("unknown style {style:?}"))),
    }
}

/// Parity and single-ion contrast versus evolution time.
#[pyfunction]
#[pyo3(signature = (times, tau, samples, config, seed, estimator = "expectation", style = "reverse", analysis_phase = 0.0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    times: Vec<f64>,
    tau: f64,
    samples: usize,
    config: &PyNoiseConfig,
    seed: u64,
    estimator: &str,
    style: &str,
    analysis_phase: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let estimator = match estimator {
        "expectation" => Estimator::Expectation,
        "shots" => Estimator::Shots,
        _ => return Err(PyValueError::new_err(format!("unknown estimator {estimator:?}"))),
    };
    let mut spec = CurveSpec::new(times, tau, samples, estimator);
    spec.style = parse_style(style)?;
    spec.analysis_phase = analysis_phase;
    let cfg = config.inner.clone();
    let set = py.detach(|| contrast_curve(&spec, &cfg, seed)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("parity", curve_dict(py, &set.parity)?)?;
    match (&set.ion1, &set.ion2) {
        (Some(a), Some(b)) => {
            d.set_item("ion1", curve_dict(py, a)?)?;
            d.set_item("ion2", curve_dict(py, b)?)?;
        }
        _ => {
            d.set_item("ion1", py.None())?;
            d.set_item("ion2", py.None())?;
        }
    }
    d.set_item("discard_fraction", set.discard_fraction)?;
    Ok(d)
}

/// Exponential 1/e time with zero offset; `amplitude=None` fits it.
#[pyfunction]
#[pyo3(signature = (times, contrast, standard_error, amplitude = Some(0.5)))]
fn coherence_time(
    times: Vec<f64>,
    contrast: Vec<f64>,
    standard_error: Vec<f64>,
    amplitude: Option<f64>,
) -> PyResult<(f64, f64)> {
    if times.len() != contrast.len() || times.len() != standard_error.len() {
        return Err(PyValueError::new_err("times, contrast and standard_error differ in length"));
    }
    let amp = match amplitude {
        Some(a) => Amplitude::Fixed(a),
        None => Amplitude::Free(contrast.first().copied().unwrap_or(0.5)),
    };
    let curve = ContrastCurve {
        times,
        contrast,
        standard_error,
        shots_per_point: 0,
    };
    let f = mc_coherence_time(&curve, amp).map_err(py_err)?;
    Ok((f.t, f.sigma_t))
}

/// Weighted least squares for `"exponential"`, `"gaussian"` or `"cosine"`.
#[pyfunction]
#[pyo3(signature = (t, y, sigma, model, guess, fixed = None))]
fn fit<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    y: Vec<f64>,
    sigma: Vec<f64>,
    model: &str,
    guess: Vec<f64>,
    fixed: Option<Vec<bool>>,
) -> PyResult<Bound<'py, PyDict>> {
    let model = match model {
        "exponential" => DecayModel::Exponential,
        "gaussian" => DecayModel::GaussianDecay,
        "cosine" => DecayModel::Cosine,
        _ => return Err(PyValueError::new_err(format!("unknown model {model:?}"))),
    };
    let fixed = fixed.unwrap_or_else(|| model.default_fixed());
    let r = fit_model_masked(&t, &y, &sigma, model, &guess, &fixed).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("names", model.param_names().to_vec())?;
    d.set_item("params", r.params)?;
    d.set_item("sigmas", r.sigmas)?;
    d.set_item("chi2", r.chi2)?;
    d.set_item("chi2_reduced", r.chi2_reduced)?;
    d.set_item("dof", r.dof)?;
    d.set_item("converged", r.converged)?;
    d.set_item("covariance", r.covariance)?;
    Ok(d)
}

/// `[(mechanism, limit_s, source), ...]`, most detrimental first.
#[pyfunction]
#[pyo3(signature = (config, hopping_limit, tau = 100.0, t_zeeman = 145.0))]
fn budget(config: &PyNoiseConfig, hopping_limit: f64, tau: f64, t_zeeman: f64) -> PyResult<Vec<(String, f64, String)>> {
    let entries = budget_report(&config.inner, tau, hopping_limit, t_zeeman).map_err(py_err)?;
    Ok(entries
        .into_iter()
        .map(|e| (e.mechanism, e.limit, format!("{:?}", e.source)))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (ns, epsilon_systematic = 0.01, epsilon_rms = 1e-3, shots = 2000, seed = 0))]
fn pulse_benchmark<'py>(
    py: Python<'py>,
    ns: Vec<usize>,
    epsilon_systematic: f64,
    epsilon_rms: f64,
    shots: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = BenchConfig {
        epsilon_systematic,
        epsilon_rms,
        shots,
        ..BenchConfig::default()
    };
    let c = mc_pulse_benchmark(&ns, &cfg, seed).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", c.n)?;
    d.set_item("uncalibrated", c.uncalibrated)?;
    d.set_item("calibrated", c.calibrated)?;
    d.set_item("reverse", c.reverse)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (b = 4.1))]
fn sensitivity_ratio(b: f64) -> PyResult<f64> {
    noise::sensitivity_ratio(&PhysicalConstants::default(), b).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (t_zeeman, b = 4.1))]
fn project_clock_coherence(t_zeeman: f64, b: f64) -> PyResult<f64> {
    noise::project_clock_coherence(&PhysicalConstants::default(), t_zeeman, b).map_err(py_err)
}

#[pyfunction]
fn pulse_error_limit(epsilon_rms: f64, tau: f64) -> PyResult<f64> {
    noise::pulse_error_limit(epsilon_rms, tau).map_err(py_err)
}

#[pyfunction]
fn hop_contrast(gamma: f64, tau: f64, t_phi: f64, t: f64) -> PyResult<f64> {
    dfs_core::montecarlo::hop_contrast_exact(gamma, tau, t_phi, t).map_err(py_err)
}

#[pymodule]
fn dfs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyState>()?;
    m.add_class::<PyNoiseConfig>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_time, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(budget, m)?)?;
    m.add_function(wrap_pyfunction!(pulse_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(project_clock_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(pulse_error_limit, m)?)?;
    m.add_function(wrap_pyfunction!(hop_contrast, m)?)?;
    Ok(())
}
