//! Extremal quadratic-form statistics `max_j Σ_i a_i |x_ij|²` and the QUE
//! fluctuation statistic.
//!
//! The observable is always diagonal, so it is carried as its nonzero
//! spectrum. Row sums are accumulated as a positive and a negative part, each
//! summed in sorted order; this makes the statistics exactly invariant under
//! permutations of the spectrum and exactly odd under `a ↦ −a`.

use serde::{Deserialize, Serialize};

use crate::field::{ColMatrix, FieldScalar};
use crate::rng::GaussianBlock;
use crate::{Error, Result};

/// Nonzero eigenvalues `(a_1, …, a_k)` of a diagonal observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("spectrum must have at least one value"));
        }
        if let Some(bad) = values.iter().find(|v| **v == 0.0 || !v.is_finite()) {
            return Err(Error::arg(format!(
                "spectrum values must be finite and nonzero, got {bad}"
            )));
        }
        Ok(Self { values })
    }

    /// Rank-`k` projection `diag(1, …, 1)`.
    pub fn ones(k: usize) -> Result<Self> {
        Self::new(vec![1.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&i| self.values[i]).collect())
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn all_negative(&self) -> bool {
        self.values.iter().all(|&v| v < 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn trace_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalMode {
    /// `max_j Σ a_i |x_ij|²`
    MaxSigned,
    /// `max_j |Σ a_i |x_ij|²|`
    MaxAbs,
    /// `min_j Σ a_i |x_ij|²`
    Min,
}

impl ExtremalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremalMode::MaxSigned => "max_signed",
            ExtremalMode::MaxAbs => "max_abs",
            ExtremalMode::Min => "min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Haar,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawStatistic {
    pub value: f64,
    pub n: usize,
    pub mode: ExtremalMode,
    pub source: Source,
}

struct RowSums {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl RowSums {
    fn new(k: usize) -> Self {
        Self {
            pos: Vec::with_capacity(k),
            neg: Vec::with_capacity(k),
        }
    }

    fn sum(&mut self) -> f64 {
        self.pos.sort_unstable_by(f64::total_cmp);
        self.neg.sort_unstable_by(f64::total_cmp);
        let p: f64 = self.pos.iter().sum();
        let q: f64 = self.neg.iter().sum();
        self.pos.clear();
        self.neg.clear();
        p - q
    }
}

fn row_extremum<T: FieldScalar>(
    columns: &ColMatrix<T>,
    spectrum: &Spectrum,
    mode: ExtremalMode,
    factor: f64,
) -> Result<f64> {
    if columns.cols() != spectrum.k() {
        return Err(Error::arg(format!(
            "spectrum has k = {} but {} columns were supplied",
            spectrum.k(),
            columns.cols()
        )));
    }
    if columns.rows() == 0 {
        return Err(Error::arg("columns have zero length"));
    }
    let a = spectrum.values();
    let mut acc = RowSums::new(a.len());
    let mut best = match mode {
        ExtremalMode::Min => f64::INFINITY,
        _ => f64::NEG_INFINITY,
    };
    for j in 0..columns.rows() {
        for (i, &ai) in a.iter().enumerate() {
            let term = ai * columns.get(j, i).abs_sqr();
            if ai > 0.0 {
                acc.pos.push(term);
            } else {
                acc.neg.push(-term);
            }
        }
        let v = factor * acc.sum();
        best = match mode {
            ExtremalMode::MaxSigned => best.max(v),
            ExtremalMode::MaxAbs => best.max(v.abs()),
            ExtremalMode::Min => best.min(v),
        };
    }
    Ok(best)
}

/// Extremum over rows `j` of `Σ_i a_i (√n |γ_ij|)²` for orthonormal columns
/// (Gram–Schmidt output or leading Haar rows), carrying the factor `n`.
pub fn extremal_statistic<T: FieldScalar>(
    columns: &ColMatrix<T>,
    spectrum: &Spectrum,
    mode: ExtremalMode,
) -> Result<RawStatistic> {
    let n = columns.rows();
    Ok(RawStatistic {
        value: row_extremum(columns, spectrum, mode, n as f64)?,
        n,
        mode,
        source: Source::Haar,
    })
}

/// Extremum over rows `j` of `Σ_i a_i |y_ij|²`, no dimension factor.
pub fn gaussian_extremal_statistic<T: FieldScalar>(
    block: &GaussianBlock<T>,
    spectrum: &Spectrum,
    mode: ExtremalMode,
) -> Result<RawStatistic> {
    Ok(RawStatistic {
        value: row_extremum(block.entries(), spectrum, mode, 1.0)?,
        n: block.n(),
        mode,
        source: Source::Gaussian,
    })
}

/// `N(⟨γ, Aγ⟩ − Tr A/N) / √(2 Tr Å²)` with `A = diag(a_1, …, a_k, 0, …)`.
pub fn que_statistic<T: FieldScalar>(gamma: &[T], spectrum: &Spectrum, trace_a: f64, trace_a_sq: f64) -> Result<f64> {
    let n = gamma.len();
    if spectrum.k() > n {
        return Err(Error::arg(format!("rank {} exceeds vector length {n}", spectrum.k())));
    }
    let nf = n as f64;
    let traceless_sq = trace_a_sq - trace_a * trace_a / nf;
    if !(traceless_sq > 1e-14 * trace_a_sq.abs().max(1.0)) {
        return Err(Error::domain(format!(
            "traceless part of the observable vanishes (Tr Å² = {traceless_sq:e})"
        )));
    }
    let form: f64 = spectrum.values().iter().zip(gamma).map(|(a, g)| a * g.abs_sqr()).sum();
    Ok(nf * (form - trace_a / nf) / (2.0 * traceless_sq).sqrt())
}
