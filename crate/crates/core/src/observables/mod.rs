//! Quantities measured on probe trajectories.
//!
//! The spectrum is that of the expectation-value series `M(t) = <M̂_x(t)>`
//! (mean-removed periodogram), not a two-time operator correlator.
//! Frequencies are angular, `ω = 2πf`.

mod analysis;
mod entanglement;
mod series;
mod spectrum;

pub use analysis::{
    find_peaks, linear_fit, plateau, LinearFit, Peak, Plateau, PEAK_PROMINENCE, PEAK_SEPARATION_BINS, PLATEAU_SLOPE,
    PLATEAU_TAIL,
};
pub use entanglement::{
    correlation_matrix, entanglement_lifetime, entanglement_trace, log_negativity, lower_bound_c2prime,
    lower_bound_c2prime_checked, p_of_t, CorrelationMatrix, EntanglementTrace, Lifetime, CLIP_TOL, SYMMETRY_TOL,
    TRACE_TOL,
};
pub use series::{magnetization_operator, magnetization_series, TimeSeries};
pub use spectrum::{power_spectrum, SpectrumEstimate, Window, MIN_SAMPLES};

use crate::linalg::LinalgError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ObservablesError {
    #[error("trajectory has no {0} record")]
    MissingRecord(&'static str),
    #[error("time grid is not uniform")]
    NonUniformGrid,
    #[error("{times} times but {values} values")]
    LengthMismatch { times: usize, values: usize },
    #[error("need at least {min} samples, got {n}")]
    TooShort { n: usize, min: usize },
    #[error("expected a {expected}x{expected} matrix, got {found} rows")]
    WrongDimension { expected: usize, found: usize },
    #[error("trace deviates from 1 by {0:e}")]
    TraceDeviation(f64),
    #[error("state has eigenvalue {0:e} below the clipping tolerance")]
    NotPositive(f64),
    #[error("entanglement lifetime undefined: E(0) = 0")]
    UndefinedLifetime,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
