//! Dense complex linear algebra on small tensor-product spaces.
//!
//! All operators are stored densely in [`ComplexMatrix`] (column-major).
//! Superoperators follow the column-stacking convention
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, which is what the `dynamics` module builds
//! against.

mod eigen;
mod expm;
mod layout;
mod matrix;
pub mod pauli;
mod tensor;

#[cfg(test)]
pub(crate) mod test_support;

pub use eigen::{herm_eig, herm_eigvals, HermitianEigen};
pub use expm::{expm, lu_solve};
pub use layout::SubsystemLayout;
pub use matrix::{c64, ComplexMatrix, C64};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use tensor::{embed, embed_many, kron, kron_all, partial_trace, partial_transpose};

/// Largest `|a - a^†|` entry accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("site {site} out of range for {n_sites} subsystems")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("site {0} listed more than once")]
    DuplicateSite(usize),
    #[error("empty site set")]
    EmptySiteSet,
    #[error("subsystem layout needs at least one site of nonzero dimension")]
    InvalidLayout,
    #[error("matrix is not Hermitian (max |a - a^†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Sum of singular values.
///
/// Hermitian input (within [`HERMITICITY_TOL`]) uses `sum |λ|`; anything else
/// goes through the eigenvalues of `a^† a`.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.is_hermitian(HERMITICITY_TOL) {
        return Ok(herm_eigvals(a)?.iter().map(|l| l.abs()).sum());
    }
    let gram = a.adjoint().matmul(a).hermitian_part();
    Ok(herm_eigvals(&gram)?
        .iter()
        .map(|&l| libm::sqrt(l.max(0.0)))
        .sum())
}
