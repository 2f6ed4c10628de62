use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GammaPlusMode, ModelConfig, ModelError};
use crate::Warning;

/// Relative slack on the factor-3 validity heuristics, so that `ν = Ω_min/3`
/// itself does not warn.
const VALIDITY_SLACK: f64 = 1e-12;

/// Parameters of one fluctuator.
#[derive(Clone, Debug, PartialEq)]
pub struct Tlf {
    /// Bias energy `ε_j`.
    pub eps: f64,
    /// Local field (tunnel amplitude) `Δ_j`.
    pub delta: f64,
    /// Mixing angle, `tan θ_j = Δ_j / ε_j`.
    pub theta: f64,
    /// Spin frequency `Ω_j = sqrt(ε_j² + Δ_j²)`.
    pub omega: f64,
    pub gamma_z: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    /// Dressed dephasing rate `Γ_z = γ_z cos²θ / 2`.
    pub rate_z: f64,
    /// Dressed emission rate `Γ_- = (γ_- + γ_+) sin²θ / 4`.
    pub rate_minus: f64,
    /// Dressed absorption rate `Γ_+ = γ_+ sin²θ / 4`.
    pub rate_plus: f64,
}

impl Tlf {
    pub fn new(eps: f64, delta: f64, gamma_z: f64, gamma_minus: f64, gamma_plus: f64) -> Self {
        let theta = libm::atan2(delta, eps);
        let (s, c) = libm::sincos(theta);
        Self {
            eps,
            delta,
            theta,
            omega: libm::hypot(eps, delta),
            gamma_z,
            gamma_minus,
            gamma_plus,
            rate_z: gamma_z * c * c / 2.0,
            rate_minus: (gamma_minus + gamma_plus) * s * s / 4.0,
            rate_plus: gamma_plus * s * s / 4.0,
        }
    }
}

/// Sampled fluctuators plus the couplings derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct TlfEnsemble {
    pub tlfs: Vec<Tlf>,
    /// `min_j Ω_j`.
    pub omega_min: f64,
    /// Probe-TLF coupling, `Ω_min / 3`.
    pub nu: f64,
    /// TLF-TLF coupling, `(μ/ν) ν`.
    pub mu: f64,
}

impl TlfEnsemble {
    /// Ensemble from explicit fluctuators, with `ν = Ω_min/3`.
    pub fn from_tlfs(tlfs: Vec<Tlf>, mu_over_nu: f64) -> Self {
        let omega_min = tlfs.iter().map(|t| t.omega).fold(f64::INFINITY, f64::min);
        let nu = omega_min / 3.0;
        Self {
            tlfs,
            omega_min,
            nu,
            mu: mu_over_nu * nu,
        }
    }

    pub fn len(&self) -> usize {
        self.tlfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tlfs.is_empty()
    }

    /// Same fluctuators with a different `μ/ν`.
    pub fn with_mu_over_nu(&self, mu_over_nu: f64) -> Self {
        Self {
            mu: mu_over_nu * self.nu,
            ..self.clone()
        }
    }

    /// Same fluctuators with the probe decoupled (`ν = 0`); `μ` is kept.
    pub fn decoupled(&self) -> Self {
        Self {
            nu: 0.0,
            ..self.clone()
        }
    }

    /// Validity diagnostics: underdamping and the weak-coupling heuristics.
    pub fn diagnostics(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        for (j, t) in self.tlfs.iter().enumerate() {
            for (name, v) in [("γ_z", t.gamma_z), ("γ_-", t.gamma_minus), ("γ_+", t.gamma_plus)] {
                if v >= t.omega {
                    out.push(Warning::Overdamped {
                        tlf: j,
                        rate: name,
                        value: v,
                        omega: t.omega,
                    });
                }
            }
            if t.omega < 3.0 * self.nu * (1.0 - VALIDITY_SLACK) {
                out.push(Warning::WeakProbeCoupling {
                    tlf: j,
                    omega: t.omega,
                    nu: self.nu,
                });
            }
        }
        if self.mu > 0.0 {
            for (j, k) in ring_bonds(self.tlfs.len()) {
                let min_omega = self.tlfs[j].omega.min(self.tlfs[k].omega);
                if min_omega < 3.0 * self.mu * (1.0 - VALIDITY_SLACK) {
                    out.push(Warning::WeakTlfCoupling {
                        j,
                        k,
                        min_omega,
                        mu: self.mu,
                    });
                }
            }
        }
        out
    }
}

/// Nearest-neighbour ring `(j, (j+1) mod N)`: one bond for `N = 2`, none for
/// `N = 1`.
pub fn ring_bonds(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => alloc::vec![(0, 1)],
        _ => (0..n).map(|j| (j, (j + 1) % n)).collect(),
    }
}

/// Inverse CDF of the density `∝ x` on `[a, b]`.
pub fn sample_linear(a: f64, b: f64, u: f64) -> f64 {
    libm::sqrt(a * a + u * (b * b - a * a))
}

/// CDF of the density `∝ x` on `[a, b]`.
pub fn linear_cdf(a: f64, b: f64, x: f64) -> f64 {
    ((x * x - a * a) / (b * b - a * a)).clamp(0.0, 1.0)
}

/// Inverse CDF of the density `∝ 1/x` on `[a, b]`.
pub fn sample_log_uniform(a: f64, b: f64, u: f64) -> f64 {
    a * libm::pow(b / a, u)
}

/// CDF of the density `∝ 1/x` on `[a, b]`.
pub fn log_uniform_cdf(a: f64, b: f64, x: f64) -> f64 {
    (libm::log(x / a) / libm::log(b / a)).clamp(0.0, 1.0)
}

fn check_range(name: &'static str, a: f64, b: f64, positive: bool) -> Result<(), ModelError> {
    if !(a.is_finite() && b.is_finite()) || a >= b || (positive && a <= 0.0) {
        return Err(ModelError::DegenerateRange { name, low: a, high: b });
    }
    Ok(())
}

/// Sampled ensemble and the diagnostics raised while building it.
#[derive(Clone, Debug)]
pub struct SampledEnsemble {
    pub ensemble: TlfEnsemble,
    pub warnings: Vec<Warning>,
}

/// Draws a TLF ensemble.
///
/// All `ε_j` are drawn first, then all `Δ_j`; the bath rates follow once
/// `Ω_min` is known (per TLF: `γ_z`, `γ_-`, then `γ_+` when sampled).
pub fn sample_ensemble(cfg: &ModelConfig, rng: &mut impl RngCore) -> Result<SampledEnsemble, ModelError> {
    cfg.validate()?;
    let n = cfg.n_tlf;
    let (ea, eb) = cfg.eps_range();
    let (da, db) = cfg.delta_range();
    check_range("eps", ea, eb, false)?;
    check_range("delta", da, db, true)?;

    let eps: Vec<f64> = (0..n).map(|_| sample_linear(ea, eb, rng.random::<f64>())).collect();
    let delta: Vec<f64> = (0..n).map(|_| sample_log_uniform(da, db, rng.random::<f64>())).collect();
    let omega_min = eps
        .iter()
        .zip(&delta)
        .map(|(e, d)| libm::hypot(*e, *d))
        .fold(f64::INFINITY, f64::min);
    let (ga, gb) = (omega_min / 6.0, omega_min / 2.0);
    check_range("gamma", ga, gb, true)?;

    let mut tlfs = Vec::with_capacity(n);
    for j in 0..n {
        let gz = sample_log_uniform(ga, gb, rng.random::<f64>());
        let gm = sample_log_uniform(ga, gb, rng.random::<f64>());
        let gp = match cfg.gamma_plus_mode {
            GammaPlusMode::ScaledByNbar => cfg.nbar * gm,
            GammaPlusMode::Sampled => sample_log_uniform(ga, gb, rng.random::<f64>()),
        };
        tlfs.push(Tlf::new(eps[j], delta[j], gz, gm, gp));
    }
    let ensemble = TlfEnsemble::from_tlfs(tlfs, cfg.mu_over_nu);
    let warnings = ensemble.diagnostics();
    Ok(SampledEnsemble { ensemble, warnings })
}

/// [`sample_ensemble`] with a ChaCha8 stream seeded from `cfg.seed`.
pub fn sample_seeded(cfg: &ModelConfig) -> Result<SampledEnsemble, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sample_ensemble(cfg, &mut rng)
}
