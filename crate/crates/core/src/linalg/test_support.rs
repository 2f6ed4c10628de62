//! Random fixtures for unit tests.

use rand::{Rng, RngCore};

use super::{c64, herm_eig, ComplexMatrix};

pub fn random_matrix(rng: &mut impl RngCore, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl RngCore, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

pub fn random_unitary(rng: &mut impl RngCore, n: usize) -> ComplexMatrix {
    herm_eig(&random_hermitian(rng, n)).unwrap().vectors
}

/// `G G^† / Tr(G G^†)` for a random complex `G`.
pub fn random_density(rng: &mut impl RngCore, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let p = g.matmul(&g.adjoint()).hermitian_part();
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}
