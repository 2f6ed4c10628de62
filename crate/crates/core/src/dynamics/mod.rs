//! Lindblad evolution of the joint probe + TLF state.
//!
//! The generator is vectorized column-stacking, `vec(ρ̇) = L vec(ρ)`, and
//! propagated on a uniform grid with a precomputed `expm(L dt)`. When `H` and
//! the jump operators leave a basis partition invariant (the probes carry no
//! transverse terms, so each probe basis configuration is a sector), the
//! propagator is split into independent blocks `ρ_ab`.

mod generator;
mod marginal;
mod propagator;
mod trajectory;

pub use generator::{block_liouvillian, build_liouvillian, LindbladGenerator};
pub use marginal::propagate_marginal;
pub use propagator::{invariant_sectors, step_propagator, Method, Propagator, Scratch};
pub use trajectory::{
    expectation, grid_steps, propagate, propagate_with, rk4_reference, CptpReport, PropagateOptions, RecordSpec,
    Trajectory, MIN_EIGENVALUE_TOL, REPAIR_TOL, RK4_STEP_LIMIT,
};

use crate::linalg::LinalgError;
use crate::model::ModelError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid generator: {0}")]
    InvalidGenerator(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("step {dt} does not divide duration {t_end}")]
    InvalidGrid { t_end: f64, dt: f64 },
    #[error("{check} check failed at step {step} (t = {t}): {value:e}")]
    InvariantBreach {
        step: usize,
        t: f64,
        check: &'static str,
        value: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
