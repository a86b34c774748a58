//! Simulation and analysis toolkit for a two-ion decoherence-free-subspace
//! clock-qubit memory.
//!
//! * [`quantum`]: exact 4×4 density-matrix engine and observables.
//! * [`noise`]: field sensitivities, hopping, common-field noise, scattering,
//!   leakage and pulse-error limits.
//! * [`sequence`]: Ramsey dynamical-decoupling and π-pulse-train builders.
//! * [`montecarlo`]: trajectory sampler, contrast curves, analytic oracles.
//! * [`analysis`]: readout pipeline, least-squares fitting, noise budget.

// Negated float comparisons are how inputs reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod quantum;
pub mod sequence;

pub use error::{DfsError, Result};
