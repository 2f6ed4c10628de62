use alloc::vec::Vec;

/// Default peak prominence, relative to the global maximum.
pub const PEAK_PROMINENCE: f64 = 0.05;
/// Default minimum peak separation, in frequency bins.
pub const PEAK_SEPARATION_BINS: f64 = 3.0;
/// Default plateau slope tolerance.
pub const PLATEAU_SLOPE: f64 = 1e-6;
/// Default tail fraction inspected by [`plateau`].
pub const PLATEAU_TAIL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub x: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima of `y` whose prominence is at least `rel_prominence` times
/// `max(y)`, thinned so that kept peaks are more than `min_separation` apart
/// in `x` (taller peaks win). Sorted by `x`.
///
/// Prominence is the height above the higher of the two minima between the
/// peak and the nearest taller sample on each side (or the array end).
pub fn find_peaks(x: &[f64], y: &[f64], rel_prominence: f64, min_separation: f64) -> Vec<Peak> {
    let n = y.len().min(x.len());
    if n == 0 {
        return Vec::new();
    }
    let global = y[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let threshold = rel_prominence * global;
    let mut found = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || y[i] > y[i - 1];
        let right_ok = i + 1 == n || y[i] >= y[i + 1];
        // flat interior runs count once, at their left edge
        if !(left_ok && right_ok) || (n == 1) {
            continue;
        }
        let mut left_min = y[i];
        let mut j = i;
        while j > 0 {
            j -= 1;
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        let mut k = i + 1;
        while k < n {
            if y[k] > y[i] {
                break;
            }
            right_min = right_min.min(y[k]);
            k += 1;
        }
        let base = if i == 0 {
            right_min
        } else if i + 1 == n {
            left_min
        } else {
            left_min.max(right_min)
        };
        let prominence = y[i] - base;
        if prominence >= threshold && prominence > 0.0 {
            found.push(Peak {
                index: i,
                x: x[i],
                height: y[i],
                prominence,
            });
        }
    }
    found.sort_by(|a, b| b.height.total_cmp(&a.height));
    let mut kept: Vec<Peak> = Vec::new();
    for p in found {
        if kept.iter().all(|q| (q.x - p.x).abs() > min_separation) {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| a.x.total_cmp(&b.x));
    kept
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope · x + intercept`.
///
/// `r_squared` is NaN when `y` is constant.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - slope * a - intercept;
            r * r
        })
        .sum();
    // undefined for a constant response
    let r_squared = if ss_tot == 0.0 { f64::NAN } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    /// Largest `|dE/dt|` (forward differences) over the tail.
    pub max_slope: f64,
    /// Mean value over the tail.
    pub value: f64,
    pub reached: bool,
}

/// Checks whether the last `tail_fraction` of the samples is flat to
/// `|dE/dt| < slope_tol`.
pub fn plateau(times: &[f64], values: &[f64], tail_fraction: f64, slope_tol: f64) -> Option<Plateau> {
    let n = times.len().min(values.len());
    if n < 3 {
        return None;
    }
    let tail = (libm::ceil(n as f64 * tail_fraction) as usize).clamp(2, n);
    let start = n - tail;
    let mut max_slope: f64 = 0.0;
    for i in start..n - 1 {
        let dt = times[i + 1] - times[i];
        if dt > 0.0 {
            max_slope = max_slope.max(((values[i + 1] - values[i]) / dt).abs());
        }
    }
    let value = values[start..n].iter().sum::<f64>() / tail as f64;
    Some(Plateau {
        max_slope,
        value,
        reached: max_slope < slope_tol,
    })
}
