//! Kolmogorov–Smirnov statistics and simple estimators.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

pub const MIN_KS_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub n: usize,
    /// Second sample size for two-sample tests.
    pub m: Option<usize>,
}

impl KsReport {
    pub fn rejects(&self) -> bool {
        self.statistic > self.threshold
    }
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`, so `c(0.01) = 1.628`.
pub fn ks_critical_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_KS_SAMPLES, got: sample.len() });
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParams("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup |F_n - F|` against a continuous reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, alpha: f64) -> Result<KsReport> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    Ok(KsReport {
        statistic: d,
        threshold: ks_critical_coefficient(alpha) / n.sqrt(),
        alpha,
        n: v.len(),
        m: None,
    })
}

/// `sup |F_n - G_m|` between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsReport> {
    let (x, y) = (sorted(a)?, sorted(b)?);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() || j < y.len() {
        let t = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] == t {
            i += 1;
        }
        while j < y.len() && y[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsReport {
        statistic: d,
        threshold: ks_critical_coefficient(alpha) * ((n + m) / (n * m)).sqrt(),
        alpha,
        n: x.len(),
        m: Some(y.len()),
    })
}

/// CDF of `|N(0, sigma^2)|`.
pub fn half_normal_cdf(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if sigma == 0.0 {
        1.0
    } else {
        erf(x / (sigma * std::f64::consts::SQRT_2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self { mean, se: (var / n as f64).sqrt(), n }
    }

    /// `(mean - target) / se`; infinite when the SE vanishes and the means differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if self.se > 0.0 {
            diff / self.se
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams("slope fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParams("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_value() {
        assert!((ks_critical_coefficient(0.01) - 1.628).abs() < 1e-3);
    }

    #[test]
    fn identical_samples() {
        let a: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        assert_eq!(ks_two_sample(&a, &a, 0.01).unwrap().statistic, 0.0);
    }

    #[test]
    fn quantile_sample_is_close() {
        let n = 200;
        let a: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let r = ks_one_sample(&a, |x| x.clamp(0.0, 1.0), 0.01).unwrap();
        assert!(r.statistic <= 1.0 / (n + 1) as f64 + 1e-12);
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            ks_one_sample(&[0.5; 10], |x| x, 0.01),
            Err(Error::InsufficientSamples { needed: 50, got: 10 })
        ));
    }

    #[test]
    fn mean_and_slope() {
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        let xs = [1.0, 4.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn half_normal_values() {
        assert_eq!(half_normal_cdf(-1.0, 1.0), 0.0);
        assert!((half_normal_cdf(1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-9);
    }
}
