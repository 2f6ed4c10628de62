use alloc::vec::Vec;

use super::ObservablesError;
use crate::dynamics::Trajectory;
use crate::linalg::pauli::{sigma_x, sigma_y, sigma_z};
use crate::linalg::{c64, herm_eig, herm_eigvals, kron, partial_transpose, trace_norm, ComplexMatrix, SubsystemLayout};
use crate::Warning;

/// Eigenvalues of the probe state in `[-CLIP_TOL, 0)` are set to zero before
/// measuring entanglement.
pub const CLIP_TOL: f64 = 1e-7;
/// Largest `|Tr ρ - 1|` accepted by the entanglement measures.
pub const TRACE_TOL: f64 = 1e-6;
/// Largest `|Λ - Λᵀ|` entry treated as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Two-qubit correlation matrix `Λ_ij = Tr[s_i ⊗ s_j ρ]`, `i, j ∈ {x, y, z}`.
pub type CorrelationMatrix = [[f64; 3]; 3];

fn check_probe_state(rho: &ComplexMatrix) -> Result<(), ObservablesError> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(ObservablesError::WrongDimension {
            expected: 4,
            found: rho.rows(),
        });
    }
    let dev = (rho.trace() - c64(1.0, 0.0)).norm();
    if dev > TRACE_TOL {
        return Err(ObservablesError::TraceDeviation(dev));
    }
    Ok(())
}

/// PSD repair confined to measurement: eigenvalues in `[-CLIP_TOL, 0)` are
/// zeroed and the trace restored, anything more negative is an error.
fn clipped(rho: &ComplexMatrix) -> Result<ComplexMatrix, ObservablesError> {
    let eig = herm_eig(rho)?;
    let min = eig.values[0];
    if min < -CLIP_TOL {
        return Err(ObservablesError::NotPositive(min));
    }
    if min >= 0.0 {
        return Ok(rho.hermitian_part());
    }
    let before: f64 = eig.values.iter().sum();
    let after: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
    Ok(eig.reconstruct_with(|l| l.max(0.0) * before / after))
}

/// `E_P = log₂ ‖ρ^{T_A}‖₁`, floored at zero.
pub fn log_negativity(rho_p: &ComplexMatrix) -> Result<f64, ObservablesError> {
    check_probe_state(rho_p)?;
    let rho = clipped(rho_p)?;
    let pt = partial_transpose(&rho, 0, &SubsystemLayout::qubits(2))?;
    let norm = trace_norm(&pt)?;
    Ok(libm::log2(norm).max(0.0))
}

/// `Λ_ij = Tr[s_i^A ⊗ s_j^B ρ_P]`.
pub fn correlation_matrix(rho_p: &ComplexMatrix) -> Result<CorrelationMatrix, ObservablesError> {
    if rho_p.rows() != 4 || rho_p.cols() != 4 {
        return Err(ObservablesError::WrongDimension {
            expected: 4,
            found: rho_p.rows(),
        });
    }
    let paulis = [sigma_x(), sigma_y(), sigma_z()];
    let mut lambda = [[0.0; 3]; 3];
    for (i, a) in paulis.iter().enumerate() {
        for (j, b) in paulis.iter().enumerate() {
            lambda[i][j] = crate::dynamics::expectation(&kron(a, b), rho_p);
        }
    }
    Ok(lambda)
}

fn asymmetry(l: &CorrelationMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((l[i][j] - l[j][i]).abs());
        }
    }
    worst
}

/// `C′₂` together with the warning raised when `Λ` is not symmetric.
///
/// Symmetric `Λ` uses `Σ|λ_i|` over its eigenvalues; otherwise the singular
/// values stand in.
pub fn lower_bound_c2prime_checked(lambda: &CorrelationMatrix) -> (f64, Option<Warning>) {
    let asym = asymmetry(lambda);
    let to_matrix = |m: &CorrelationMatrix| ComplexMatrix::from_fn(3, 3, |r, c| c64(m[r][c], 0.0));
    let (sum, warning) = if asym <= SYMMETRY_TOL {
        let sym = ComplexMatrix::from_fn(3, 3, |r, c| c64(0.5 * (lambda[r][c] + lambda[c][r]), 0.0));
        let ev = herm_eigvals(&sym).expect("real symmetric 3x3");
        (ev.iter().map(|v| v.abs()).sum::<f64>(), None)
    } else {
        let m = to_matrix(lambda);
        let gram = m.transpose().matmul(&m).hermitian_part();
        let ev = herm_eigvals(&gram).expect("Gram matrix is symmetric");
        let sv: f64 = ev.iter().map(|v| libm::sqrt(v.max(0.0))).sum();
        (sv, Some(Warning::AsymmetricCorrelation { asymmetry: asym }))
    };
    ((libm::log2(1.0 + sum) - 1.0).max(0.0), warning)
}

/// `C′₂ = max[0, log₂(1 + |λ₁| + |λ₂| + |λ₃|) - 1]`.
pub fn lower_bound_c2prime(lambda: &CorrelationMatrix) -> f64 {
    lower_bound_c2prime_checked(lambda).0
}

/// Log-negativity over time, optionally with the correlation bound.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementTrace {
    pub times: Vec<f64>,
    pub log_negativity: Vec<f64>,
    pub c2prime: Option<Vec<f64>>,
    pub correlations: Option<Vec<CorrelationMatrix>>,
    pub warnings: Vec<Warning>,
}

impl EntanglementTrace {
    pub fn max_log_negativity(&self) -> f64 {
        self.log_negativity.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `C′₂ - E_P` along the trace.
    pub fn max_bound_excess(&self) -> Option<f64> {
        self.c2prime.as_ref().map(|c| {
            c.iter()
                .zip(&self.log_negativity)
                .map(|(c, e)| c - e)
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }

    /// Time average of `E_P - C′₂` (trapezoid rule on the uniform grid).
    pub fn mean_bound_gap(&self) -> Option<f64> {
        let c = self.c2prime.as_ref()?;
        let gaps: Vec<f64> = self.log_negativity.iter().zip(c).map(|(e, c)| e - c).collect();
        Some(trapezoid_mean(&gaps))
    }
}

fn trapezoid_mean(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let inner: f64 = v[1..n - 1].iter().sum();
            (inner + 0.5 * (v[0] + v[n - 1])) / (n - 1) as f64
        }
    }
}

/// Entanglement measures for every recorded probe marginal.
pub fn entanglement_trace(traj: &Trajectory, with_bound: bool) -> Result<EntanglementTrace, ObservablesError> {
    if traj.marginals.len() != traj.times.len() || traj.marginals.is_empty() {
        return Err(ObservablesError::MissingRecord("probe marginal"));
    }
    let mut out = EntanglementTrace {
        times: traj.times.clone(),
        log_negativity: Vec::with_capacity(traj.len()),
        c2prime: with_bound.then(|| Vec::with_capacity(traj.len())),
        correlations: with_bound.then(|| Vec::with_capacity(traj.len())),
        warnings: Vec::new(),
    };
    for rho in &traj.marginals {
        out.log_negativity.push(log_negativity(rho)?);
        if with_bound {
            let lambda = correlation_matrix(rho)?;
            let (c, w) = lower_bound_c2prime_checked(&lambda);
            if let Some(w) = w {
                if out.warnings.len() < 16 {
                    out.warnings.push(w);
                }
            }
            out.c2prime.as_mut().expect("requested").push(c);
            out.correlations.as_mut().expect("requested").push(lambda);
        }
    }
    Ok(out)
}

/// First crossing `E(t) ≤ ε E(0)`, linearly interpolated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifetime {
    pub t_eps: f64,
    /// Grid step, which bounds the interpolation error.
    pub resolution: f64,
}

/// `None` when the trace never drops to `ε E(0)` within the run.
pub fn entanglement_lifetime(times: &[f64], values: &[f64], epsilon: f64) -> Result<Option<Lifetime>, ObservablesError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ObservablesError::InvalidArgument("epsilon must lie in (0, 1]"));
    }
    if times.len() != values.len() || times.is_empty() {
        return Err(ObservablesError::LengthMismatch {
            times: times.len(),
            values: values.len(),
        });
    }
    let e0 = values[0];
    if !(e0 > 0.0) {
        return Err(ObservablesError::UndefinedLifetime);
    }
    let resolution = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let threshold = epsilon * e0;
    let Some(n) = values.iter().position(|&v| v <= threshold) else {
        return Ok(None);
    };
    if n == 0 {
        return Ok(Some(Lifetime { t_eps: times[0], resolution }));
    }
    let (e1, e2) = (values[n - 1], values[n]);
    let frac = if e1 == e2 { 1.0 } else { (e1 - threshold) / (e1 - e2) };
    Ok(Some(Lifetime {
        t_eps: times[n - 1] + frac * (times[n] - times[n - 1]),
        resolution,
    }))
}

/// `p(t) = 1 - exp[-γ(2n̄ + 1) t / 2]`.
pub fn p_of_t(t: f64, gamma: f64, nbar: f64) -> f64 {
    -libm::expm1(-gamma * (2.0 * nbar + 1.0) * t / 2.0)
}
