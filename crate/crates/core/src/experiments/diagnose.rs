//! Coupling-diagnostics sweep over an `(N, k)` grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::run::fan_out;
use crate::field::{FieldKind, FieldScalar};
use crate::haar::{coupling_diagnostics, gram_schmidt_partial, CouplingDiagnostics};
use crate::rng::{gaussian_block, substream};
use crate::stats::EmpiricalSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseRow {
    pub n: usize,
    pub k: usize,
    pub replicas: usize,
    pub median_eps: f64,
    /// `(log N)³ √(k/N)`
    pub eps_bound: f64,
    pub median_l: f64,
    /// `log N / √N`
    pub l_bound: f64,
    pub median_delta: f64,
    pub median_delta_gap: f64,
    pub median_inner: f64,
}

impl DiagnoseRow {
    pub fn eps_ok(&self) -> bool {
        self.median_eps <= self.eps_bound
    }

    pub fn l_ok(&self) -> bool {
        self.median_l <= self.l_bound
    }
}

fn one<T: FieldScalar>(n: usize, k: usize, seed: u64, index: u64) -> Result<CouplingDiagnostics> {
    let y = gaussian_block::<T>(n, k, &mut substream(seed, index))?;
    Ok(coupling_diagnostics(&gram_schmidt_partial(&y)?))
}

/// Replica `r` of grid point `g` uses stream index `(g << 32) | r`.
pub fn diagnose_sweep(
    grid: &[(usize, usize)],
    replicas: usize,
    seed: u64,
    workers: usize,
    field: FieldKind,
) -> Result<Vec<DiagnoseRow>> {
    if replicas == 0 {
        return Err(Error::arg("diagnose needs at least one replica"));
    }
    grid.iter()
        .enumerate()
        .map(|(g, &(n, k))| {
            if k == 0 || k > n {
                return Err(Error::arg(format!("grid point ({n}, {k}) needs 1 <= k <= N")));
            }
            let base = (g as u64) << 32;
            let records = match field {
                FieldKind::Real => fan_out(replicas, workers, |r| one::<f64>(n, k, seed, base | r as u64))?,
                FieldKind::Complex => fan_out(replicas, workers, |r| one::<Complex64>(n, k, seed, base | r as u64))?,
            };
            let median = |i: usize| -> Result<f64> {
                Ok(EmpiricalSample::new(records.iter().map(|d| d.values()[i]).collect())?.quantile(0.5))
            };
            let nf = n as f64;
            Ok(DiagnoseRow {
                n,
                k,
                replicas,
                median_eps: median(0)?,
                eps_bound: nf.ln().powi(3) * (k as f64 / nf).sqrt(),
                median_l: median(3)?,
                l_bound: nf.ln() / nf.sqrt(),
                median_delta: median(1)?,
                median_delta_gap: median(2)?,
                median_inner: median(4)?,
            })
        })
        .collect()
}

/// Parses `1000x5,2000x10`.
pub fn parse_grid(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|item| {
            let (n, k) = item
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::arg(format!("grid entry `{item}` is not of the form NxK")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::arg(format!("grid entry `{item}`: {e}")))
            };
            Ok((parse(n)?, parse(k)?))
        })
        .collect()
}
