//! Two probe qubits coupled to a small ensemble of damped two-level
//! fluctuators (TLFs).
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerics only:
//!
//! - [`linalg`]: dense complex matrices, tensor products, partial
//!   trace/transpose, Hermitian eigensolver, matrix exponential.
//! - [`model`]: TLF parameter sampling, Hamiltonian and jump operators,
//!   initial states.
//! - [`dynamics`]: Lindblad generator, Liouvillian, propagation on uniform
//!   grids, RK4 reference integrator.
//! - [`observables`]: magnetization, power spectrum, logarithmic negativity,
//!   correlation-matrix lower bound, entanglement lifetime.
//!
//! Units: `ħ = 1` and the probe frequency `Ω_P` sets the energy scale; one
//! probe cycle is `2π / Ω_P`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod linalg;
pub mod model;
pub mod observables;

mod warning;

pub use warning::Warning;
