use core::f64::consts::FRAC_1_SQRT_2;

use super::ModelError;
use crate::linalg::{c64, herm_eigvals, kron, ComplexMatrix, SubsystemLayout, C64, HERMITICITY_TOL};

/// Tolerances applied when a matrix is accepted as a state.
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, ModelError> {
        if !m.is_square() {
            return Err(ModelError::InvalidState("not square"));
        }
        if !m.is_hermitian(HERMITICITY_TOL) {
            return Err(ModelError::InvalidState("not Hermitian"));
        }
        if (m.trace() - c64(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(ModelError::InvalidState("trace differs from 1"));
        }
        let min = herm_eigvals(&m)?.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(ModelError::InvalidState("negative eigenvalue"));
        }
        Ok(Self(m))
    }

    /// Pure state `|v><v|` from a normalized vector.
    pub fn pure(v: &[C64]) -> Result<Self, ModelError> {
        Self::new(ComplexMatrix::projector(v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    /// `(|00> + |11>)/√2`
    PhiPlus,
    /// `(|00> - |11>)/√2`
    PhiMinus,
    /// `(|01> + |10>)/√2`
    PsiPlus,
    /// `(|01> - |10>)/√2`
    PsiMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeState {
    /// `|+>_A |+>_B`
    PlusPlus,
    Bell(BellState),
}

impl ProbeState {
    /// Amplitudes on `|00>, |01>, |10>, |11>`.
    pub fn amplitudes(self) -> [C64; 4] {
        let s = c64(FRAC_1_SQRT_2, 0.0);
        let z = c64(0.0, 0.0);
        match self {
            ProbeState::PlusPlus => [c64(0.5, 0.0); 4],
            ProbeState::Bell(BellState::PhiPlus) => [s, z, z, s],
            ProbeState::Bell(BellState::PhiMinus) => [s, z, z, -s],
            ProbeState::Bell(BellState::PsiPlus) => [z, s, s, z],
            ProbeState::Bell(BellState::PsiMinus) => [z, s, -s, z],
        }
    }

    pub fn density(self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes())
    }
}

/// `ρ(0) = |probe><probe| ⊗ ρ_TLF` on the `[A, B, TLF..]` layout.
pub fn initial_state(probe: ProbeState, tlf: &ComplexMatrix, layout: &SubsystemLayout) -> Result<DensityMatrix, ModelError> {
    if layout.n_sites() < 2 || layout.dims()[..2] != [2, 2] {
        return Err(ModelError::InvalidState("layout does not start with two probe qubits"));
    }
    if tlf.rows() * 4 != layout.total_dim() {
        return Err(ModelError::InvalidState("TLF state does not match the layout"));
    }
    let tlf = DensityMatrix::new(tlf.clone())?;
    DensityMatrix::new(kron(&probe.density(), tlf.as_matrix()))
}
