//! Fluctuator parameters, system operators and initial states.
//!
//! Layout convention: sites `[A, B, TLF_1, …, TLF_N]`, all qubits. TLF
//! operators are written in each fluctuator's eigenbasis (pseudo-spin basis),
//! where the charge operator reads `X_j = cos θ_j s_z - sin θ_j s_x`. The
//! probes have no transverse field, so their charge and pseudo-spin bases
//! coincide.

mod config;
mod ensemble;
mod operators;
mod states;

pub use config::{GammaPlusMode, ModelConfig};
pub use ensemble::{
    linear_cdf, log_uniform_cdf, ring_bonds, sample_ensemble, sample_linear, sample_log_uniform,
    sample_seeded, SampledEnsemble, Tlf, TlfEnsemble,
};
pub use operators::{
    build_operators, build_single_probe_operators, hamiltonian_terms, tlf_ground_state, tlf_hamiltonian, tlf_site, Gate, Jump,
    JumpKind, SystemOperators, PROBE_A, PROBE_B,
};
pub use states::{initial_state, BellState, DensityMatrix, ProbeState};

use crate::linalg::LinalgError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid configuration: {field} = {value}")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("degenerate sampling range for {name}: [{low}, {high}]")]
    DegenerateRange { name: &'static str, low: f64, high: f64 },
    #[error("TLF ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },
    #[error("ensemble has no fluctuators")]
    EmptyEnsemble,
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
