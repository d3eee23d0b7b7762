//! Pulsed second-order autocorrelation from click streams.
//!
//! Clicks are bucketed into pulse-period windows; the histogram value at
//! lag k is the mean ordered product ⟨n_i·n_{i+k}⟩ (⟨n(n−1)⟩ at lag 0,
//! i.e. same-pulse pairs), normalized by the long-lag plateau. A single
//! detector with a dead time well below the pulse period leaves these
//! statistics unaffected.

use crate::analysis::fit::{levenberg_marquardt, ExpBunching, FitResult};
use crate::detection::ClickStream;
use crate::error::FitError;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Fraction of the lag axis (from the high end) used for normalization.
const NORMALIZATION_BAND: f64 = 0.2;
/// Minimum pair statistics in the normalization band.
const MIN_NORMALIZATION_PAIRS: u64 = 100;

/// Normalized coincidence histogram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct G2Histogram<T> {
    /// Lag times, s (multiples of the pulse period, starting at 0).
    pub lags: Vec<T>,
    /// Normalized coincidence rates.
    pub values: Vec<T>,
    /// Standard errors per bin.
    pub errors: Vec<T>,
    /// Raw pair counts per bin.
    pub pair_counts: Vec<u64>,
}

impl<T: Scalar> G2Histogram<T> {
    pub fn zero_lag(&self) -> T {
        self.values[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag_s,g2,std_error,pairs\n");
        for i in 0..self.lags.len() {
            out.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{}\n",
                self.lags[i].into_f64(),
                self.values[i].into_f64(),
                self.errors[i].into_f64(),
                self.pair_counts[i]
            ));
        }
        out
    }
}

/// Compute the pulsed autocorrelation histogram.
///
/// `period` is the pulse repetition period (the lag-0 bin covers same-pulse
/// pairs); `max_lag` is the largest lag in units of the period.
pub fn compute_g2(
    stream: &ClickStream,
    period: f64,
    max_lag: usize,
) -> Result<G2Histogram<f64>, FitError> {
    if period <= 0.0 {
        return Err(FitError::InvalidInput("pulse period must be positive".into()));
    }
    let n_windows = (stream.duration / period).floor() as i64;
    if n_windows <= max_lag as i64 {
        return Err(FitError::InvalidInput(format!(
            "record holds {n_windows} pulse windows, need more than max_lag = {max_lag}"
        )));
    }

    // bucket clicks into pulse windows (sparse, windows sorted because the
    // stream is sorted)
    let mut windows: Vec<(i64, u64)> = Vec::new();
    for t in stream.times() {
        let w = (t / period).floor() as i64;
        if w < 0 || w >= n_windows {
            continue;
        }
        match windows.last_mut() {
            Some((last, count)) if *last == w => *count += 1,
            _ => windows.push((w, 1)),
        }
    }

    let mut pair_counts = vec![0u64; max_lag + 1];
    for (i, &(wi, ni)) in windows.iter().enumerate() {
        // lag 0: ordered same-window pairs n(n−1)
        pair_counts[0] += ni * (ni.saturating_sub(1));
        for &(wj, nj) in windows.iter().skip(i + 1) {
            let lag = (wj - wi) as usize;
            if lag > max_lag {
                break;
            }
            pair_counts[lag] += ni * nj;
        }
    }

    // mean ordered product per window pair
    let mut raw = vec![0.0f64; max_lag + 1];
    for (k, &c) in pair_counts.iter().enumerate() {
        let denom = (n_windows - k as i64) as f64;
        raw[k] = c as f64 / denom;
    }

    // plateau normalization over the top NORMALIZATION_BAND of lags
    let norm_start = ((max_lag as f64) * (1.0 - NORMALIZATION_BAND)).ceil() as usize;
    let norm_start = norm_start.clamp(1, max_lag);
    let band = &raw[norm_start..=max_lag];
    let band_pairs: u64 = pair_counts[norm_start..=max_lag].iter().sum();
    if band_pairs < MIN_NORMALIZATION_PAIRS {
        return Err(FitError::InvalidInput(format!(
            "too few clicks to normalize the correlation: {band_pairs} pairs in the plateau band, need >= {MIN_NORMALIZATION_PAIRS}"
        )));
    }
    let norm = band.iter().sum::<f64>() / band.len() as f64;

    let mut values = Vec::with_capacity(max_lag + 1);
    let mut errors = Vec::with_capacity(max_lag + 1);
    let mut lags = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let v = raw[k] / norm;
        // Poisson error on the pair count; lag 0 holds each unordered pair
        // twice
        let independent_pairs = if k == 0 {
            (pair_counts[0] / 2).max(1)
        } else {
            pair_counts[k].max(1)
        };
        let err = if pair_counts[k] == 0 {
            1.0 / norm / (n_windows - k as i64) as f64
        } else {
            v / (independent_pairs as f64).sqrt()
        };
        lags.push(k as f64 * period);
        values.push(v);
        errors.push(err);
    }
    Ok(G2Histogram {
        lags,
        values,
        errors,
        pair_counts,
    })
}

/// Remove a Poissonian background fraction `r` (e.g. the independently
/// measured dark-count fraction) from a raw coincidence value:
/// g2' = 1 + (g2 − 1)/(1 − r)², the exact form of
/// (g2 − 2r(1−r) − r²)/(1−r)². The coherent fixed point g2 = 1 is
/// preserved exactly.
pub fn rescale_g2<T: Scalar>(raw: T, background_fraction: T) -> Result<T, FitError> {
    let r = background_fraction;
    if r < T::zero() || r >= T::one() {
        return Err(FitError::InvalidInput(
            "background fraction must lie in [0, 1)".to_string(),
        ));
    }
    let one_minus = T::one() - r;
    Ok(T::one() + (raw - T::one()) / (one_minus * one_minus))
}

/// Fit 1 + A·e^(−τ/τ_d) to the positive-lag bins of a bunching histogram.
pub fn fit_bunching<T: Scalar>(hist: &G2Histogram<T>) -> Result<FitResult<T>, FitError> {
    if hist.lags.len() < 6 {
        return Err(FitError::InvalidInput(
            "bunching fit needs at least 6 lag bins".to_string(),
        ));
    }
    // exclude the antibunched lag-0 bin
    let xs: Vec<T> = hist.lags[1..].to_vec();
    let ys: Vec<T> = hist.values[1..].to_vec();
    let es: Vec<T> = hist.errors[1..].to_vec();
    // initial amplitude from the first bins, decay from the 1/e crossing
    let head = ys.iter().take(5).cloned().sum::<T>() / T::from_f64(5.0);
    let a0 = (head - T::one()).max(T::from_f64(1e-3));
    let target = T::one() + a0 / T::from_f64(std::f64::consts::E);
    let mut tau0 = xs[xs.len() - 1] / T::from_f64(4.0);
    for (x, y) in xs.iter().zip(&ys) {
        if *y < target {
            tau0 = (*x).max(xs[0]);
            break;
        }
    }
    levenberg_marquardt(&ExpBunching, &xs, &ys, Some(&es), &[a0, tau0])
}
