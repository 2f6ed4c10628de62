//! Single-qubit Pauli matrices and a sparse Pauli-string operator form.
//!
//! Basis convention: `|0>` is the `s_z = +1` (upper) state, so
//! `s_+ = |0><1|` raises and `s_- = |1><0|` lowers.

use alloc::vec::Vec;

use num_traits::Zero;

use super::{c64, ComplexMatrix, LinalgError, C64};

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[C64::zero(), c64(0.0, -1.0)], &[c64(0.0, 1.0), C64::zero()]])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `s_+ = (s_x + i s_y) / 2`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// `s_- = (s_x - i s_y) / 2`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => identity2(),
            Pauli::X => sigma_x(),
            Pauli::Y => sigma_y(),
            Pauli::Z => sigma_z(),
        }
    }
}

/// Tensor product of Paulis on `n` qubits, stored as X/Z bit masks.
///
/// Bit `n - 1 - site` of a mask refers to `site`, so masks line up with the
/// flat basis index of [`SubsystemLayout::qubits`](super::SubsystemLayout::qubits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: usize,
    z_mask: usize,
    y_count: u32,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        }
    }

    /// String with the given single-site factors; other sites are identity.
    pub fn from_sites(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self, LinalgError> {
        let mut s = Self::identity(n_qubits);
        for &(site, p) in factors {
            if site >= n_qubits {
                return Err(LinalgError::SiteOutOfRange { site, n_sites: n_qubits });
            }
            let bit = 1usize << (n_qubits - 1 - site);
            if (s.x_mask | s.z_mask) & bit != 0 {
                return Err(LinalgError::DuplicateSite(site));
            }
            match p {
                Pauli::I => {}
                Pauli::X => s.x_mask |= bit,
                Pauli::Z => s.z_mask |= bit,
                Pauli::Y => {
                    s.x_mask |= bit;
                    s.z_mask |= bit;
                    s.y_count += 1;
                }
            }
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `P|k> = phase(k) |k ^ x_mask>`.
    #[inline]
    fn phase(&self, k: usize) -> C64 {
        let sign = if (k & self.z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let base = match self.y_count % 4 {
            0 => c64(1.0, 0.0),
            1 => c64(0.0, 1.0),
            2 => c64(-1.0, 0.0),
            _ => c64(0.0, -1.0),
        };
        base * sign
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            m[(k ^ self.x_mask, k)] = self.phase(k);
        }
        m
    }
}

/// Linear combination of Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    /// Adds `coeff * P`, merging with an existing identical string.
    pub fn add_term(&mut self, coeff: C64, p: PauliString) {
        assert_eq!(p.n_qubits(), self.n_qubits);
        if coeff.is_zero() {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|(_, q)| *q == p) {
            t.0 += coeff;
        } else {
            self.terms.push((coeff, p));
        }
    }

    pub fn add_real(&mut self, coeff: f64, factors: &[(usize, Pauli)]) -> Result<(), LinalgError> {
        let p = PauliString::from_sites(self.n_qubits, factors)?;
        self.add_term(c64(coeff, 0.0), p);
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for t in &mut self.terms {
            t.0 *= s;
        }
    }

    pub fn extend(&mut self, other: &PauliSum) {
        assert_eq!(other.n_qubits, self.n_qubits);
        for &(c, p) in &other.terms {
            self.add_term(c, p);
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::zeros(n, n);
        for &(c, p) in &self.terms {
            for k in 0..n {
                m[(k ^ p.x_mask, k)] += c * p.phase(k);
            }
        }
        m
    }

    /// `self * rho` without forming the dense operator.
    pub fn apply_left(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = 1usize << self.n_qubits;
        assert_eq!(rho.rows(), n);
        let mut out = ComplexMatrix::zeros(n, rho.cols());
        for &(coeff, p) in &self.terms {
            for c in 0..rho.cols() {
                for k in 0..n {
                    let v = rho[(k, c)];
                    if !v.is_zero() {
                        out[(k ^ p.x_mask, c)] += coeff * p.phase(k) * v;
                    }
                }
            }
        }
        out
    }

    /// `rho * self` without forming the dense operator.
    pub fn apply_right(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = 1usize << self.n_qubits;
        assert_eq!(rho.cols(), n);
        let mut out = ComplexMatrix::zeros(rho.rows(), n);
        for &(coeff, p) in &self.terms {
            // (rho P)[r, c] = rho[r, c ^ x] * phase(c)
            for c in 0..n {
                let f = coeff * p.phase(c);
                let src = c ^ p.x_mask;
                for r in 0..rho.rows() {
                    out[(r, c)] += rho[(r, src)] * f;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{embed_many, SubsystemLayout};
    use super::*;

    #[test]
    fn ladder_operators_from_paulis() {
        let i = c64(0.0, 1.0);
        let plus = (&sigma_x() + &sigma_y().scale(i)).scale_real(0.5);
        let minus = (&sigma_x() - &sigma_y().scale(i)).scale_real(0.5);
        assert!(plus.approx_eq(&sigma_plus(), 1e-15));
        assert!(minus.approx_eq(&sigma_minus(), 1e-15));
    }

    #[test]
    fn pauli_algebra() {
        let xy = sigma_x().matmul(&sigma_y());
        assert!(xy.approx_eq(&sigma_z().scale(c64(0.0, 1.0)), 1e-15));
        for p in [sigma_x(), sigma_y(), sigma_z()] {
            assert!(p.matmul(&p).approx_eq(&identity2(), 1e-15));
        }
    }

    #[test]
    fn strings_match_embedded_kron() {
        let layout = SubsystemLayout::qubits(3);
        let cases: [&[(usize, Pauli)]; 4] = [
            &[(0, Pauli::X)],
            &[(1, Pauli::Y), (2, Pauli::Z)],
            &[(0, Pauli::Y), (1, Pauli::Y), (2, Pauli::X)],
            &[],
        ];
        for factors in cases {
            let s = PauliString::from_sites(3, factors).unwrap();
            let mats: Vec<(usize, ComplexMatrix)> = factors.iter().map(|&(site, p)| (site, p.matrix())).collect();
            let refs: Vec<(usize, &ComplexMatrix)> = mats.iter().map(|(s, m)| (*s, m)).collect();
            let dense = embed_many(&refs, &layout).unwrap();
            assert!(s.to_dense().approx_eq(&dense, 0.0), "{factors:?}");
        }
    }

    #[test]
    fn sum_products_match_dense() {
        let mut h = PauliSum::new(3);
        h.add_real(0.7, &[(0, Pauli::Z)]).unwrap();
        h.add_real(-0.3, &[(1, Pauli::X), (2, Pauli::Y)]).unwrap();
        h.add_real(1.1, &[(0, Pauli::Y), (2, Pauli::Z)]).unwrap();
        h.add_real(0.2, &[(0, Pauli::Z)]).unwrap();
        assert_eq!(h.terms().len(), 3);
        let dense = h.to_dense();
        let rho = ComplexMatrix::from_fn(8, 8, |r, c| c64((r + 2 * c) as f64 * 0.1, (r as f64 - c as f64) * 0.05));
        assert!(h.apply_left(&rho).approx_eq(&dense.matmul(&rho), 1e-13));
        assert!(h.apply_right(&rho).approx_eq(&rho.matmul(&dense), 1e-13));
    }

    #[test]
    fn duplicate_site_rejected() {
        assert_eq!(
            PauliString::from_sites(2, &[(0, Pauli::X), (0, Pauli::Z)]),
            Err(LinalgError::DuplicateSite(0))
        );
    }
}
