use alloc::vec::Vec;

use super::ObservablesError;
use crate::dynamics::Trajectory;
use crate::linalg::pauli::sigma_x;
use crate::linalg::{kron, ComplexMatrix};
use crate::dynamics::expectation;

/// Real samples on a uniform grid `t_n = t0 + n · step`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    /// Validates that `times` is uniform to `1e-12` (relative to `max(1, |t|)`).
    pub fn from_samples(times: &[f64], values: Vec<f64>) -> Result<Self, ObservablesError> {
        if times.len() != values.len() {
            return Err(ObservablesError::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        if times.len() < 2 {
            return Err(ObservablesError::TooShort { n: times.len(), min: 2 });
        }
        let t0 = times[0];
        let step = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
        if !(step > 0.0) {
            return Err(ObservablesError::NonUniformGrid);
        }
        for (n, &t) in times.iter().enumerate() {
            let expect = t0 + n as f64 * step;
            if (t - expect).abs() > 1e-12 * expect.abs().max(1.0) {
                return Err(ObservablesError::NonUniformGrid);
            }
        }
        Ok(Self { t0, step, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }
}

/// `M̂_x = s_x^A + s_x^B` on the two-probe space (`s_x` alone for one probe).
pub fn magnetization_operator(probes: usize) -> ComplexMatrix {
    let sx = sigma_x();
    let id = ComplexMatrix::identity(2);
    match probes {
        1 => sx,
        _ => &kron(&sx, &id) + &kron(&id, &sx),
    }
}

/// `M(t_n) = Tr[M̂_x ρ_P(t_n)]` from the recorded probe marginals.
pub fn magnetization_series(traj: &Trajectory) -> Result<TimeSeries, ObservablesError> {
    if traj.marginals.len() != traj.times.len() || traj.marginals.is_empty() {
        return Err(ObservablesError::MissingRecord("probe marginal"));
    }
    let probes = match traj.marginals[0].rows() {
        2 => 1,
        4 => 2,
        d => return Err(ObservablesError::WrongDimension { expected: 4, found: d }),
    };
    let m = magnetization_operator(probes);
    let values = traj.marginals.iter().map(|rho| expectation(&m, rho)).collect();
    TimeSeries::from_samples(&traj.times, values)
}
