use alloc::vec::Vec;

use super::LinalgError;

/// Ordered tensor-product layout of subsystems.
///
/// Site 0 is the most significant factor: a basis index is
/// `sum_k digit_k * stride_k` with the last site varying fastest, matching
/// the ordering of [`kron`](super::kron).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self, LinalgError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(LinalgError::InvalidLayout);
        }
        let mut strides = alloc::vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total_dim = dims.iter().product();
        Ok(Self {
            dims,
            strides,
            total_dim,
        })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self::new(alloc::vec![2; n]).expect("at least one qubit")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    /// Digit of `site` in the flat index `index`.
    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.dims[site]
    }

    pub fn flatten(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn unflatten(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|k| self.digit(index, k)).collect()
    }

    /// Layout of the listed sites, in the listed order.
    pub fn sub_layout(&self, sites: &[usize]) -> Result<Self, LinalgError> {
        self.check_sites(sites)?;
        Self::new(sites.iter().map(|&s| self.dims[s]).collect())
    }

    pub(crate) fn check_sites(&self, sites: &[usize]) -> Result<(), LinalgError> {
        if sites.is_empty() {
            return Err(LinalgError::EmptySiteSet);
        }
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.dims.len() {
                return Err(LinalgError::SiteOutOfRange {
                    site: s,
                    n_sites: self.dims.len(),
                });
            }
            if sites[..i].contains(&s) {
                return Err(LinalgError::DuplicateSite(s));
            }
        }
        Ok(())
    }
}
