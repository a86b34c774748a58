//! Measurement pipeline, curve fitting and the coherence budget.

mod budget;
pub mod fit;
pub mod readout;
mod synthetic;

pub use budget::{budget_report, format_budget_table, rank, BudgetEntry, BudgetSource, LEAKAGE_LIMIT, T1_LIMIT};
pub use fit::{fit_model, fit_model_masked, DecayModel, FitResult};
pub use readout::{
    frequencies, joint_confusion, mitigate_readout, mitigated_parity, parity_estimate, post_select, sample_readout,
    single_ion_estimate, BaCountModel, ConfusionMatrix, Mitigated, ReadoutPipeline, ShotRecord,
};
pub use synthetic::{binomial_curve, pooled_standard_error};
