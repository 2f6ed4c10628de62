use alloc::vec::Vec;

use super::DynamicsError;
use crate::linalg::{c64, ComplexMatrix, C64, HERMITICITY_TOL};
use crate::model::SystemOperators;

/// `ρ̇ = -i[H, ρ] + Σ_k Γ_k (J_k ρ J_k† - {J_k†J_k, ρ}/2)`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    h: ComplexMatrix,
    jumps: Vec<(f64, ComplexMatrix)>,
    // Γ_k J_k†J_k, cached
    decay: Vec<ComplexMatrix>,
}

impl LindbladGenerator {
    pub fn new(h: ComplexMatrix, jumps: Vec<(f64, ComplexMatrix)>) -> Result<Self, DynamicsError> {
        if !h.is_square() {
            return Err(DynamicsError::InvalidGenerator("Hamiltonian is not square"));
        }
        if !h.is_finite() || !h.is_hermitian(HERMITICITY_TOL) {
            return Err(DynamicsError::InvalidGenerator("Hamiltonian is not finite and Hermitian"));
        }
        let dim = h.rows();
        for (rate, op) in &jumps {
            if !(rate.is_finite() && *rate >= 0.0) {
                return Err(DynamicsError::InvalidGenerator("jump rate is negative or not finite"));
            }
            if op.rows() != dim || op.cols() != dim {
                return Err(DynamicsError::DimensionMismatch {
                    expected: dim,
                    found: op.rows().max(op.cols()),
                });
            }
            if !op.is_finite() {
                return Err(DynamicsError::InvalidGenerator("jump operator has non-finite entries"));
            }
        }
        let decay = jumps.iter().map(|(g, j)| j.adjoint().matmul(j).scale_real(*g)).collect();
        Ok(Self { h, jumps, decay })
    }

    pub fn from_operators(ops: &SystemOperators) -> Result<Self, DynamicsError> {
        Self::new(
            ops.hamiltonian.clone(),
            ops.jumps.iter().map(|j| (j.rate, j.op.clone())).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[(f64, ComplexMatrix)] {
        &self.jumps
    }

    /// `K = -iH - ½ Σ Γ J†J`, so that `L[ρ] = Kρ + ρK† + Σ Γ JρJ†`.
    pub fn effective_generator(&self) -> ComplexMatrix {
        let mut k = self.h.scale(c64(0.0, -1.0));
        for d in &self.decay {
            k.axpy(c64(-0.5, 0.0), d);
        }
        k
    }

    /// Operator-form action `L[ρ]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let k = self.effective_generator();
        let mut out = &k.matmul(rho) + &rho.matmul(&k.adjoint());
        for (g, j) in &self.jumps {
            if *g == 0.0 {
                continue;
            }
            let jr = j.matmul(rho).matmul(&j.adjoint());
            out.axpy(c64(*g, 0.0), &jr);
        }
        out
    }

    /// Upper bound on the induced 1-norm of the superoperator.
    pub fn norm_bound(&self) -> f64 {
        let h = 2.0 * self.h.one_norm();
        let d: f64 = self
            .jumps
            .iter()
            .zip(&self.decay)
            .map(|((g, j), dd)| g * j.one_norm() * j.one_norm() + dd.one_norm())
            .sum();
        h + d
    }
}

/// Full `dim² × dim²` Liouvillian, column-stacking convention:
/// `L = -i(I⊗H - Hᵀ⊗I) + Σ Γ [J̄⊗J - ½ I⊗J†J - ½ (J†J)ᵀ⊗I]`.
pub fn build_liouvillian(gen: &LindbladGenerator) -> ComplexMatrix {
    let all: Vec<usize> = (0..gen.dim()).collect();
    block_liouvillian(gen, &all, &all)
}

/// Liouvillian restricted to the block `ρ_ab = P_a ρ P_b` for index sets `a`,
/// `b` that are each invariant under `H` and every jump operator.
///
/// Vectorization of the `|a| × |b|` block is column-stacking.
pub fn block_liouvillian(gen: &LindbladGenerator, a: &[usize], b: &[usize]) -> ComplexMatrix {
    let (da, db) = (a.len(), b.len());
    let n = da * db;
    let k = gen.effective_generator();
    let mut l = ComplexMatrix::zeros(n, n);
    // I ⊗ K_a
    for j in 0..db {
        for (ci, &gi) in a.iter().enumerate() {
            for (ri, &gr) in a.iter().enumerate() {
                let v = k[(gr, gi)];
                if v != C64::new(0.0, 0.0) {
                    l[(ri + j * da, ci + j * da)] += v;
                }
            }
        }
    }
    // conj(K_b) ⊗ I
    for (cj, &gc) in b.iter().enumerate() {
        for (rj, &gr) in b.iter().enumerate() {
            let v = k[(gr, gc)].conj();
            if v != C64::new(0.0, 0.0) {
                for i in 0..da {
                    l[(i + rj * da, i + cj * da)] += v;
                }
            }
        }
    }
    // Γ conj(J_b) ⊗ J_a
    for (g, op) in gen.jumps() {
        if *g == 0.0 {
            continue;
        }
        let nz = |idx: &[usize]| -> Vec<(usize, usize, C64)> {
            let mut out = Vec::new();
            for (c, &gc) in idx.iter().enumerate() {
                for (r, &gr) in idx.iter().enumerate() {
                    let v = op[(gr, gc)];
                    if v != C64::new(0.0, 0.0) {
                        out.push((r, c, v));
                    }
                }
            }
            out
        };
        let ja = nz(a);
        let jb = nz(b);
        for &(rb, cb, vb) in &jb {
            let w = vb.conj() * *g;
            for &(ra, ca, va) in &ja {
                l[(ra + rb * da, ca + cb * da)] += w * va;
            }
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{sigma_minus, sigma_x, sigma_z};
    use crate::linalg::test_support::{random_density, random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_generator(rng: &mut ChaCha8Rng, dim: usize, n_jumps: usize) -> LindbladGenerator {
        let h = random_hermitian(rng, dim);
        let jumps = (0..n_jumps).map(|k| (0.1 + 0.2 * k as f64, random_matrix(rng, dim, dim))).collect();
        LindbladGenerator::new(h, jumps).unwrap()
    }

    #[test]
    fn superoperator_matches_operator_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gen = random_generator(&mut rng, 4, 3);
        let l = build_liouvillian(&gen);
        for _ in 0..5 {
            let rho = random_matrix(&mut rng, 4, 4);
            let lv = l.matvec(rho.as_slice());
            let direct = gen.apply(&rho);
            let err = lv.iter().zip(direct.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn trace_row_is_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gen = random_generator(&mut rng, 4, 2);
        let l = build_liouvillian(&gen);
        let id = ComplexMatrix::identity(4);
        // vec(I)† L = 0
        for c in 0..16 {
            let s: C64 = (0..16).map(|r| id.as_slice()[r].conj() * l[(r, c)]).sum();
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn blocks_of_a_reducible_generator() {
        // σ_z on qubit 0 ⊗ anything on qubit 1 keeps qubit 0 populations fixed
        let h = &crate::linalg::kron(&sigma_z(), &ComplexMatrix::identity(2)) + &crate::linalg::kron(&ComplexMatrix::identity(2), &sigma_x());
        let j = crate::linalg::kron(&ComplexMatrix::identity(2), &sigma_minus());
        let gen = LindbladGenerator::new(h, alloc::vec![(0.3, j)]).unwrap();
        let full = build_liouvillian(&gen);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = random_density(&mut rng, 4);
        let lv = ComplexMatrix::from_col_major(4, 4, full.matvec(rho.as_slice())).unwrap();
        let (a, b) = ([0usize, 1], [2usize, 3]);
        let blk = block_liouvillian(&gen, &a, &b);
        let x: Vec<C64> = b.iter().flat_map(|&c| a.iter().map(move |&r| (r, c))).map(|(r, c)| rho[(r, c)]).collect();
        let y = blk.matvec(&x);
        for (ci, &c) in b.iter().enumerate() {
            for (ri, &r) in a.iter().enumerate() {
                assert!((y[ri + ci * 2] - lv[(r, c)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn invalid_generators_rejected() {
        let nh = ComplexMatrix::from_rows(&[&[c64(0.0, 0.0), c64(1.0, 0.0)], &[c64(0.0, 0.0), c64(0.0, 0.0)]]);
        assert!(LindbladGenerator::new(nh, alloc::vec![]).is_err());
        let h = sigma_z();
        assert!(LindbladGenerator::new(h.clone(), alloc::vec![(-1.0, sigma_x())]).is_err());
        assert!(matches!(
            LindbladGenerator::new(h, alloc::vec![(1.0, ComplexMatrix::identity(4))]),
            Err(DynamicsError::DimensionMismatch { .. })
        ));
    }
}
