//! Physical noise laws and samplers.

mod constants;
pub mod field;
mod hopping;
mod limits;
mod magnetic;
mod scattering;

pub use constants::PhysicalConstants;
pub use field::{calibrate_common_noise, sample_common_field, OrnsteinUhlenbeck};
pub use hopping::{sample_hop_times, HoppingProcess, TYPICAL_HOP_RATE};
pub use limits::{leakage_rotation, pulse_error_limit, LeakageModel, PulseErrorModel, MEASURED_PULSE_EPSILON};
pub use magnetic::{
    clock_differential, clock_frequency, differential_detuning, differential_frequency, field_sensitivity,
    gradient_from_period, period_from_gradient, project_clock_coherence, sensitivity_ratio, zeeman_differential,
    MagneticEnvironment, QubitKind, DELTA_B_UNCOMPENSATED, DELTA_B_UNCOMPENSATED_ALT,
};
pub use scattering::{
    d1_detuning, saturation_intensity, scattering_limit, scattering_limit_band, scattering_rate, total_rate,
    ScatterBeam,
};
