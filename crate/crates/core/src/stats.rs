//! Small summary statistics shared by the estimators and the classifier.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error `s / √k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replicas: usize,
}

impl MeanEstimate {
    /// Summarize values in the given order (callers pass index order, so the
    /// floating-point result does not depend on scheduling).
    pub fn from_values(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self { mean: f64::NAN, standard_error: f64::NAN, replicas: 0 };
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let standard_error = if k > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (k - 1) as f64).sqrt() / (k as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { mean, standard_error, replicas: k }
    }

    /// Exact integer sums, so the mean is reproducible bit for bit.
    pub fn from_counts(values: &[u64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self { mean: f64::NAN, standard_error: f64::NAN, replicas: 0 };
        }
        let sum: u128 = values.iter().map(|&v| v as u128).sum();
        let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
        let mean = sum as f64 / k as f64;
        let standard_error = if k > 1 {
            // k Σv² − (Σv)² is exact in integers as long as it fits
            let spread = (k as u128)
                .checked_mul(sum_sq)
                .and_then(|a| a.checked_sub(sum * sum))
                .map(|s| s as f64 / (k as f64 * (k - 1) as f64))
                .unwrap_or_else(|| {
                    let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
                    ss / (k - 1) as f64
                });
            spread.sqrt() / (k as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { mean, standard_error, replicas: k }
    }

    /// Whether `target` lies within `z` standard errors.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.standard_error
    }
}

/// Linear-interpolation quantile of unsorted data, `q ∈ [0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let k = x.len();
    if k < 2 || k != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_and_float_summaries_agree() {
        let counts = [3u64, 5, 4, 10, 2];
        let floats: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let a = MeanEstimate::from_counts(&counts);
        let b = MeanEstimate::from_values(&floats);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.standard_error - b.standard_error).abs() < 1e-12);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let (s, c) = least_squares(&x, &y).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
        assert!(least_squares(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
