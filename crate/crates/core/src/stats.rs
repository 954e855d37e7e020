//! Empirical distributions, Kolmogorov–Smirnov distances and summaries.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Non-empty sample, stored sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("empirical sample is empty"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::arg("empirical sample contains NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `F_M(x) = #{v <= x} / M`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Quantile by linear interpolation between order statistics
    /// (position `p·(M−1)`).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let pos = p * (self.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        self.sorted[lo] * (1.0 - w) + self.sorted[hi] * w
    }
}

/// `sup_x |F_M(x) − F(x)|` against a continuous reference distribution.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> f64 {
    let m = sample.len() as f64;
    sample.sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    })
}

/// `sup_x |F_M(x) − G_M'(x)|` between two samples.
pub fn two_sample_ks(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xs, ys) = (a.sorted(), b.sorted());
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

/// Asymptotic 99% critical value of the one-sample KS distance.
pub fn ks_critical_99(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

/// Asymptotic 99% critical value of the two-sample KS distance, equal sizes.
pub fn two_sample_critical_99(m: usize) -> f64 {
    1.63 * (2.0 / m as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased; zero for a single value.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    /// `(p, value)` for p in 1, 5, 25, 50, 75, 95, 99 percent.
    pub quantiles: Vec<(f64, f64)>,
}

pub const SUMMARY_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

pub fn summary(sample: &EmpiricalSample) -> Summary {
    let xs = sample.sorted();
    let m = xs.len();
    let mean = xs.iter().sum::<f64>() / m as f64;
    let variance = if m > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64
    } else {
        0.0
    };
    Summary {
        count: m,
        mean,
        variance,
        min: xs[0],
        max: xs[m - 1],
        quantiles: SUMMARY_LEVELS.iter().map(|&p| (p, sample.quantile(p))).collect(),
    }
}
