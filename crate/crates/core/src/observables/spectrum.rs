use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{ObservablesError, TimeSeries};
use crate::linalg::C64;

/// Fewest samples accepted by [`power_spectrum`].
pub const MIN_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

/// One-sided periodogram on `ω_k = 2πk / (N t_s)`, `k = 0..=N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub omegas: Vec<f64>,
    pub power: Vec<f64>,
    /// Frequency resolution `1 / (N t_s)` in cycle units.
    pub delta_f: f64,
    /// Nyquist frequency `1 / (2 t_s)` in cycle units.
    pub nyquist_f: f64,
    pub n_samples: usize,
}

impl SpectrumEstimate {
    /// Angular bin width `2π δf`.
    pub fn delta_omega(&self) -> f64 {
        2.0 * PI * self.delta_f
    }

    /// `Σ_k c_k S(ω_k) δω` with `c_k = 2` for bins that have a mirror image
    /// at negative frequency and `c_k = 1` for `k = 0` and `k = N/2`.
    ///
    /// With the rectangular window this equals `2π` times the (population)
    /// variance of the series.
    pub fn integrated_power(&self) -> f64 {
        let last = self.power.len() - 1;
        let even = self.n_samples.is_multiple_of(2);
        let sum: f64 = self
            .power
            .iter()
            .enumerate()
            .map(|(k, &p)| if k == 0 || (even && k == last) { p } else { 2.0 * p })
            .sum();
        sum * self.delta_omega()
    }

    /// Index of the largest bin.
    pub fn argmax(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &p)| if p > best.1 { (k, p) } else { best })
            .0
    }
}

/// Mean-removed periodogram
/// `S(ω_k) = (t_s / W) |Σ_n w_n (M_n - M̄) e^{-iω_k n t_s}|²`, `W = Σ w_n²`.
///
/// The rectangular window has `W = N`.
pub fn power_spectrum(series: &TimeSeries, window: Window) -> Result<SpectrumEstimate, ObservablesError> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(ObservablesError::TooShort { n, min: MIN_SAMPLES });
    }
    let ts = series.step;
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let weights: Vec<f64> = match window {
        Window::Rectangular => alloc::vec![1.0; n],
        Window::Hann => (0..n)
            .map(|k| 0.5 * (1.0 - libm::cos(2.0 * PI * k as f64 / (n - 1) as f64)))
            .collect(),
    };
    let norm: f64 = weights.iter().map(|w| w * w).sum();
    let x: Vec<f64> = series.values.iter().zip(&weights).map(|(v, w)| (v - mean) * w).collect();
    // e^{-2πi j / N}
    let twiddle: Vec<C64> = (0..n)
        .map(|j| {
            let (s, c) = libm::sincos(-2.0 * PI * j as f64 / n as f64);
            C64::new(c, s)
        })
        .collect();
    let bins = n / 2 + 1;
    let mut power = Vec::with_capacity(bins);
    for k in 0..bins {
        let mut acc = C64::new(0.0, 0.0);
        let mut idx = 0usize;
        for &xn in &x {
            acc += twiddle[idx] * xn;
            idx += k;
            if idx >= n {
                idx -= n;
            }
        }
        power.push(ts / norm * acc.norm_sqr());
    }
    let delta_f = 1.0 / (n as f64 * ts);
    Ok(SpectrumEstimate {
        omegas: (0..bins).map(|k| 2.0 * PI * k as f64 * delta_f).collect(),
        power,
        delta_f,
        nyquist_f: 1.0 / (2.0 * ts),
        n_samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn series(values: Vec<f64>, step: f64) -> TimeSeries {
        TimeSeries { t0: 0.0, step, values }
    }

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn constant_series_has_no_power() {
        let s = power_spectrum(&series(vec![0.7; 64], 0.1), Window::Rectangular).unwrap();
        assert!(s.power.iter().all(|&p| p < 1e-28));
    }

    #[test]
    fn on_grid_cosine_is_one_bin() {
        let (n, ts, k0) = (4000, 0.05, 200);
        let w0 = 2.0 * PI * k0 as f64 / (n as f64 * ts);
        let v: Vec<f64> = (0..n).map(|j| 1.3 * libm::cos(w0 * j as f64 * ts)).collect();
        let s = power_spectrum(&series(v.clone(), ts), Window::Rectangular).unwrap();
        assert_eq!(s.argmax(), k0);
        assert!((s.omegas[k0] - w0).abs() < 1e-12);
        // closed form: |Σ A cos|² = (A N / 2)²
        let expect = ts / n as f64 * (1.3 * n as f64 / 2.0).powi(2);
        assert!((s.power[k0] - expect).abs() < 1e-8 * expect);
        let leak: f64 = s.power.iter().enumerate().filter(|(k, _)| *k != k0).map(|(_, p)| p).sum();
        assert!(leak < 1e-12 * expect);
        assert!((s.integrated_power() - 2.0 * PI * variance(&v)).abs() < 1e-9);
        assert!((s.delta_f - 1.0 / 200.0).abs() < 1e-15 && (s.nyquist_f - 10.0).abs() < 1e-15);
    }

    #[test]
    fn hann_window_keeps_the_peak() {
        let (n, ts) = (512, 0.05);
        let w0 = 2.0 * PI * 20.5 / (n as f64 * ts);
        let v: Vec<f64> = (0..n).map(|j| libm::cos(w0 * j as f64 * ts)).collect();
        let s = power_spectrum(&series(v, ts), Window::Hann).unwrap();
        let k = s.argmax();
        assert!(k == 20 || k == 21);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            power_spectrum(&series(vec![0.0; 8], 0.1), Window::Rectangular),
            Err(ObservablesError::TooShort { .. })
        ));
    }

    proptest! {
        #[test]
        fn parseval_identity(v in proptest::collection::vec(-3.0f64..3.0, 16..200), ts in 0.01f64..1.0) {
            let var = variance(&v);
            let s = power_spectrum(&series(v, ts), Window::Rectangular).unwrap();
            prop_assert!(s.power.iter().all(|&p| p >= 0.0));
            prop_assert!((s.integrated_power() - 2.0 * PI * var).abs() <= 1e-9 * (1.0 + var));
        }
    }
}
