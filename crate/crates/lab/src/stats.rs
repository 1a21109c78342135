//! Seed-level summary statistics.

use serde::Serialize;

/// z-quantile of the two-sided 95% normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean with a normal-approximation 95% interval over independent samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation; 0 for fewer than two samples.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

impl Interval {
    pub fn of(xs: &[f64]) -> Self {
        let m = mean(xs);
        let half = Z95 * std_dev(xs) / (xs.len().max(1) as f64).sqrt();
        Self { mean: m, ci95_low: m - half, ci95_high: m + half, n: xs.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let i = Interval::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(i.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((i.ci95_high - 2.5 - Z95 * sd / 2.0).abs() < 1e-12);
        assert_eq!(Interval::of(&[7.0]).ci95_low, 7.0);
    }
}
