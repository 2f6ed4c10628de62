use core::fmt;

/// Non-fatal diagnostics. The core never logs; callers decide what to do
/// with these.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// A sampled bath rate is not below the TLF frequency.
    Overdamped { tlf: usize, rate: &'static str, value: f64, omega: f64 },
    /// `Ω_j` is below `3ν`.
    WeakProbeCoupling { tlf: usize, omega: f64, nu: f64 },
    /// `min(Ω_j, Ω_k)` is below `3μ` on a coupled pair.
    WeakTlfCoupling { j: usize, k: usize, min_omega: f64, mu: f64 },
    /// RK4 step large relative to the generator norm.
    LargeStep { norm_times_dt: f64 },
    /// Correlation matrix not symmetric; bound evaluated with singular values.
    AsymmetricCorrelation { asymmetry: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Overdamped { tlf, rate, value, omega } => {
                write!(f, "TLF {tlf}: {rate} = {value:.4} is not below Ω = {omega:.4} (overdamped)")
            }
            Warning::WeakProbeCoupling { tlf, omega, nu } => {
                write!(f, "TLF {tlf}: Ω = {omega:.4} is below 3ν = {:.4}", 3.0 * nu)
            }
            Warning::WeakTlfCoupling { j, k, min_omega, mu } => {
                write!(f, "TLF pair ({j}, {k}): min Ω = {min_omega:.4} is below 3μ = {:.4}", 3.0 * mu)
            }
            Warning::LargeStep { norm_times_dt } => {
                write!(f, "integration step large: ‖L‖·dt = {norm_times_dt:.3} > 0.1")
            }
            Warning::AsymmetricCorrelation { asymmetry } => {
                write!(f, "correlation matrix asymmetric by {asymmetry:.2e}; using singular values")
            }
        }
    }
}
