use super::ModelError;

/// How the absorption rate `γ_+` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GammaPlusMode {
    /// `γ_+ = n̄ γ_-`.
    #[default]
    ScaledByNbar,
    /// Drawn log-uniformly like the other bath rates.
    Sampled,
}

/// User-chosen model knobs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    /// Probe frequency `Ω_P = ε_P` (energy unit).
    pub omega_p: f64,
    pub n_tlf: usize,
    /// `ε_P / ε̄_j`.
    pub ratio_eps: f64,
    /// `tan θ̄_j = Δ̄_j / ε̄_j`.
    pub tan_theta_bar: f64,
    /// `μ / ν`.
    pub mu_over_nu: f64,
    /// Mean bath occupation `n̄`.
    pub nbar: f64,
    pub seed: u64,
    pub gamma_plus_mode: GammaPlusMode,
    /// Halve the TLF-TLF coupling term (reading `V_TLF` as part of `2 H_TLF`).
    pub halve_couplings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            omega_p: 1.0,
            n_tlf: 4,
            ratio_eps: 3.0,
            tan_theta_bar: 1.0 / 3.0,
            mu_over_nu: 0.0,
            nbar: 0.0,
            seed: 1,
            gamma_plus_mode: GammaPlusMode::ScaledByNbar,
            halve_couplings: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidConfig { field: name, value: v })
            }
        };
        positive("omega_p", self.omega_p)?;
        positive("ratio_eps", self.ratio_eps)?;
        positive("tan_theta_bar", self.tan_theta_bar)?;
        if !(self.mu_over_nu.is_finite() && self.mu_over_nu >= 0.0) {
            return Err(ModelError::InvalidConfig {
                field: "mu_over_nu",
                value: self.mu_over_nu,
            });
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(ModelError::InvalidConfig {
                field: "nbar",
                value: self.nbar,
            });
        }
        if self.n_tlf == 0 {
            return Err(ModelError::InvalidConfig {
                field: "n_tlf",
                value: 0.0,
            });
        }
        // 2 probes + N TLFs must index into a usize bit mask
        if self.n_tlf > 12 {
            return Err(ModelError::InvalidConfig {
                field: "n_tlf",
                value: self.n_tlf as f64,
            });
        }
        Ok(())
    }

    /// `ε̄_j = ε_P / ratio_eps`.
    pub fn eps_bar(&self) -> f64 {
        self.omega_p / self.ratio_eps
    }

    /// `Δ̄_j = tan θ̄_j · ε̄_j`.
    pub fn delta_bar(&self) -> f64 {
        self.tan_theta_bar * self.eps_bar()
    }

    /// Sampling interval for the bias energies.
    pub fn eps_range(&self) -> (f64, f64) {
        let e = self.eps_bar();
        (0.5 * e, 1.5 * e)
    }

    /// Sampling interval for the local fields.
    pub fn delta_range(&self) -> (f64, f64) {
        let d = self.delta_bar();
        let half = 0.5 * self.omega_p.min(d);
        (d - half, d + half)
    }
}
