//! Exact two-ion density-matrix representation, global microwave pulses,
//! diagonal free evolution and the parity / DFS observables.
//!
//! Conventions: basis order `|00⟩, |01⟩, |10⟩, |11⟩` with ion 1 first;
//! pulse phases are measured from `σx`; free evolution advances the phase
//! of `|1⟩` relative to `|0⟩`, so a positive differential detuning
//! increases the DFS phase `φ` of `(|01⟩ + e^{iφ}|10⟩)/√2`.

mod ops;
mod state;

pub use ops::{
    apply_global_pulse, apply_phases, conjugate, dephase_ion, dfs_coherence, dfs_phase, free_evolve,
    global_rotation, kron, parity, parity_after_analysis, reduced_state, rotation_operator,
    single_ion_observables, EvolutionTerms, GlobalPulse, HopSign,
};
pub use state::{basis_index, TwoQubitState, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
