//! Replica fan-out, normalization and KS suites.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SpectrumSpec, Theorem};
use crate::field::{FieldKind, FieldScalar};
use crate::haar::{coupling_diagnostics, gram_schmidt_partial, CouplingDiagnostics};
use crate::limits::{
    diverging_rank_admissible, normalization_diverging, normalization_fixed_field, real_equivalent_spectrum, LimitLaw,
    Normalization, StatisticConvention,
};
use crate::quadratic::{extremal_statistic, gaussian_extremal_statistic, ExtremalMode, Source, Spectrum};
use crate::rng::{gaussian_block, substream};
use crate::special::ln_reg_gamma_pair;
use crate::stats::{ks_distance, summary, two_sample_ks, EmpiricalSample, Summary};
use crate::{Error, Result};

/// Exact law of a Gaussian extremal statistic whose spectrum has a single
/// repeated value, in terms of `max_j c χ²_k` over `N` rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactLaw {
    /// `S = max_j c χ²_k`
    Max { n: u64, k: usize, c: f64 },
    /// `S = −min_j c χ²_k`
    NegMin { n: u64, k: usize, c: f64 },
    /// `S = min_j c χ²_k`
    Min { n: u64, k: usize, c: f64 },
    /// `S = −max_j c χ²_k`
    NegMax { n: u64, k: usize, c: f64 },
}

impl ExactLaw {
    /// Exact law for `(spectrum, mode)` on `n` rows, when the spectrum is a
    /// repeated single value. Complex spectra are mapped to their real
    /// equivalent first.
    pub fn for_statistic(spectrum: &Spectrum, mode: ExtremalMode, field: FieldKind, n: u64) -> Option<Self> {
        let real = real_equivalent_spectrum(spectrum, field);
        let v = real.values()[0];
        if real.values().iter().any(|&x| x != v) {
            return None;
        }
        let (k, c) = (real.k(), v.abs());
        Some(match (v > 0.0, mode) {
            (true, ExtremalMode::MaxSigned | ExtremalMode::MaxAbs) => ExactLaw::Max { n, k, c },
            (true, ExtremalMode::Min) => ExactLaw::Min { n, k, c },
            (false, ExtremalMode::MaxSigned) => ExactLaw::NegMin { n, k, c },
            (false, ExtremalMode::MaxAbs) => ExactLaw::Max { n, k, c },
            (false, ExtremalMode::Min) => ExactLaw::NegMax { n, k, c },
        })
    }

    /// `(ln P, ln Q)` of a single `c χ²_k` at `x >= 0`.
    fn single(k: usize, c: f64, x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        ln_reg_gamma_pair(k as f64 / 2.0, x / (2.0 * c)).expect("valid incomplete gamma arguments")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ExactLaw::Max { n, k, c } => (n as f64 * Self::single(k, c, x).0).exp(),
            ExactLaw::Min { n, k, c } => -(n as f64 * Self::single(k, c, x).1).exp_m1(),
            ExactLaw::NegMin { n, k, c } => {
                if x >= 0.0 {
                    1.0
                } else {
                    (n as f64 * Self::single(k, c, -x).1).exp()
                }
            }
            ExactLaw::NegMax { n, k, c } => {
                if x >= 0.0 {
                    1.0
                } else {
                    -(n as f64 * Self::single(k, c, -x).0).exp_m1()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceResult {
    pub source: Source,
    /// Raw statistics in replica order.
    pub raw: Vec<f64>,
    /// `scale · raw + shift`, replica order.
    pub normalized: Vec<f64>,
    pub ks_vs_limit: f64,
    /// Raw sample against the exact finite-N Gaussian law, when available.
    pub ks_vs_exact: Option<f64>,
    pub raw_summary: Summary,
    pub normalized_summary: Summary,
}

impl SourceResult {
    pub fn raw_sample(&self) -> EmpiricalSample {
        EmpiricalSample::new(self.raw.clone()).expect("non-empty finite sample")
    }

    pub fn normalized_sample(&self) -> EmpiricalSample {
        EmpiricalSample::new(self.normalized.clone()).expect("non-empty finite sample")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub eps_n_k: Summary,
    pub max_delta: Summary,
    pub max_delta_gap: Summary,
    pub max_l: Summary,
    pub max_inner: Summary,
}

impl DiagnosticsSummary {
    pub fn from_records(records: &[CouplingDiagnostics]) -> Result<Self> {
        let column = |i: usize| -> Result<Summary> {
            Ok(summary(&EmpiricalSample::new(
                records.iter().map(|d| d.values()[i]).collect(),
            )?))
        };
        Ok(Self {
            eps_n_k: column(0)?,
            max_delta: column(1)?,
            max_delta_gap: column(2)?,
            max_l: column(3)?,
            max_inner: column(4)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rank: usize,
    pub normalization: Normalization,
    pub exact_law: Option<ExactLaw>,
    pub sources: Vec<SourceResult>,
    pub ks_two_sample: Option<f64>,
    pub diagnostics_summary: Option<DiagnosticsSummary>,
    pub acceptance: Vec<AcceptanceCheck>,
    pub warnings: Vec<String>,
    pub runtime_seconds: f64,
}

impl ExperimentResult {
    pub fn source(&self, source: Source) -> Option<&SourceResult> {
        self.sources.iter().find(|s| s.source == source)
    }

    pub fn accepted(&self) -> bool {
        self.acceptance.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ReplicaOutcome {
    haar: Option<f64>,
    gaussian: Option<f64>,
    diagnostics: Option<CouplingDiagnostics>,
}

struct Plan {
    spectrum: Spectrum,
    normalization: Normalization,
}

fn plan(config: &ExperimentConfig, warnings: &mut Vec<String>) -> Result<Plan> {
    let spectrum = config.resolved_spectrum()?;
    let n = config.dimension as u64;
    let normalization = match config.theorem {
        Theorem::FixedRank | Theorem::RankOne => normalization_fixed_field(&spectrum, n, config.mode, config.field)
            .map_err(|e| Error::config("mode", e.to_string()))?,
        Theorem::DivergingRank => {
            let SpectrumSpec::Diverging { alpha, epsilon } = config.spectrum else {
                unreachable!("validated")
            };
            let k = spectrum.k();
            if !diverging_rank_admissible(n, alpha, k, epsilon) {
                warnings.push(format!(
                    "rank {k} violates |k - N^alpha| <= N^(alpha/2 - epsilon) for alpha = {alpha}, epsilon = {epsilon}"
                ));
            }
            normalization_diverging(n, alpha, k)?
        }
        Theorem::Que => {
            let nf = config.dimension as f64;
            let (tr, tr2) = (spectrum.trace(), spectrum.trace_sq());
            let traceless = tr2 - tr * tr / nf;
            if !(traceless > 0.0) {
                return Err(Error::config("spectrum", "observable has no traceless part"));
            }
            let denom = (2.0 * traceless).sqrt();
            if config.field == FieldKind::Complex {
                warnings.push("que with the complex field: normality is reported, not expected".into());
            }
            Normalization {
                scale: 1.0 / denom,
                shift: -tr / denom,
                law: LimitLaw::StandardNormal,
                statistic_convention: StatisticConvention::HaarTimesN,
            }
        }
    };
    Ok(Plan {
        spectrum,
        normalization,
    })
}

fn replica<T: FieldScalar>(config: &ExperimentConfig, plan: &Plan, index: usize) -> Result<ReplicaOutcome> {
    let mut stream = substream(config.seed, index as u64);
    let n = config.dimension;
    if config.theorem == Theorem::Que {
        let y = gaussian_block::<T>(n, 1, &mut stream)?;
        let sample = gram_schmidt_partial(&y)?;
        let gamma = sample.gamma().col(0);
        let form: f64 = plan
            .spectrum
            .values()
            .iter()
            .zip(gamma)
            .map(|(a, g)| a * g.abs_sqr())
            .sum();
        return Ok(ReplicaOutcome {
            haar: Some(n as f64 * form),
            ..Default::default()
        });
    }
    let y = gaussian_block::<T>(n, plan.spectrum.k(), &mut stream)?;
    let mut out = ReplicaOutcome::default();
    if config.source.includes_gaussian() {
        out.gaussian = Some(gaussian_extremal_statistic(&y, &plan.spectrum, config.mode)?.value);
    }
    if config.source.includes_haar() {
        let sample = gram_schmidt_partial(&y)?;
        out.haar = Some(extremal_statistic(sample.gamma(), &plan.spectrum, config.mode)?.value);
        if config.diagnostics {
            out.diagnostics = Some(coupling_diagnostics(&sample));
        }
    }
    Ok(out)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))
}

/// Runs `f(index)` for every replica on `workers` threads; results come back
/// in index order and the first failure is tagged with its replica index.
pub fn fan_out<R, F>(replicas: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let pool = build_pool(workers)?;
    pool.install(|| {
        (0..replicas)
            .into_par_iter()
            .map(|i| {
                f(i).map_err(|e| Error::Replica {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<R>>>()
    })
}

fn source_result(
    source: Source,
    raw: Vec<f64>,
    normalization: &Normalization,
    exact: Option<ExactLaw>,
) -> Result<SourceResult> {
    let normalized: Vec<f64> = raw.iter().map(|&s| normalization.apply(s)).collect();
    let raw_sample = EmpiricalSample::new(raw.clone())?;
    let norm_sample = EmpiricalSample::new(normalized.clone())?;
    Ok(SourceResult {
        source,
        ks_vs_limit: ks_distance(&norm_sample, |x| normalization.law.cdf(x)),
        ks_vs_exact: exact.map(|law| ks_distance(&raw_sample, |x| law.cdf(x))),
        raw_summary: summary(&raw_sample),
        normalized_summary: summary(&norm_sample),
        raw,
        normalized,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let mut warnings = Vec::new();
    if config.replicas < 100 {
        warnings.push(format!("only {} replicas; KS distances are coarse", config.replicas));
    }
    let plan = plan(config, &mut warnings)?;
    let outcomes = match config.field {
        FieldKind::Real => fan_out(config.replicas, config.workers, |i| replica::<f64>(config, &plan, i))?,
        FieldKind::Complex => fan_out(config.replicas, config.workers, |i| {
            replica::<Complex64>(config, &plan, i)
        })?,
    };

    let n = config.dimension as u64;
    let exact_law = match config.theorem {
        Theorem::Que => None,
        _ => ExactLaw::for_statistic(&plan.spectrum, config.mode, config.field, n),
    };

    let mut sources = Vec::new();
    if outcomes[0].haar.is_some() {
        let raw = outcomes
            .iter()
            .map(|o| o.haar.expect("haar in every replica"))
            .collect();
        sources.push(source_result(Source::Haar, raw, &plan.normalization, exact_law)?);
    }
    if outcomes[0].gaussian.is_some() {
        let raw = outcomes
            .iter()
            .map(|o| o.gaussian.expect("gaussian in every replica"))
            .collect();
        sources.push(source_result(Source::Gaussian, raw, &plan.normalization, exact_law)?);
    }

    let ks_two_sample = if sources.len() == 2 {
        Some(two_sample_ks(&sources[0].raw_sample(), &sources[1].raw_sample()))
    } else {
        None
    };

    let diagnostics_summary = if config.diagnostics && config.source.includes_haar() && config.theorem != Theorem::Que {
        let records: Vec<CouplingDiagnostics> = outcomes.iter().filter_map(|o| o.diagnostics).collect();
        Some(DiagnosticsSummary::from_records(&records)?)
    } else {
        None
    };

    let mut acceptance = Vec::new();
    let thresholds = config.acceptance;
    for s in &sources {
        let tag = match s.source {
            Source::Haar => "haar",
            Source::Gaussian => "gaussian",
        };
        if let Some(th) = thresholds.ks_vs_limit {
            acceptance.push(check(format!("ks_vs_limit[{tag}]"), s.ks_vs_limit, th));
        }
        if let Some(th) = thresholds.ks_vs_exact {
            match s.ks_vs_exact {
                Some(v) => acceptance.push(check(format!("ks_vs_exact[{tag}]"), v, th)),
                None => warnings.push("ks_vs_exact threshold given but no exact law exists".into()),
            }
        }
    }
    if let (Some(th), Some(v)) = (thresholds.ks_two_sample, ks_two_sample) {
        acceptance.push(check("ks_two_sample".into(), v, th));
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ExperimentResult {
        config: config.clone(),
        rank: plan.spectrum.k(),
        normalization: plan.normalization,
        exact_law,
        sources,
        ks_two_sample,
        diagnostics_summary,
        acceptance,
        warnings,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

fn check(name: String, value: f64, threshold: f64) -> AcceptanceCheck {
    AcceptanceCheck {
        name,
        value,
        threshold,
        passed: value < threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::SourceSelection;
    use crate::quadratic::que_statistic;
    use crate::special::exact_gaussian_max_cdf;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn exact_law_selection() {
        let law = ExactLaw::for_statistic(&sp(&[2.0, 2.0]), ExtremalMode::MaxSigned, FieldKind::Real, 50).unwrap();
        assert_eq!(law, ExactLaw::Max { n: 50, k: 2, c: 2.0 });
        for x in [0.5, 3.0, 20.0] {
            assert_eq!(law.cdf(x), exact_gaussian_max_cdf(50, 2, 2.0, x).unwrap());
        }
        let c = ExactLaw::for_statistic(&sp(&[1.0]), ExtremalMode::MaxSigned, FieldKind::Complex, 9).unwrap();
        assert_eq!(c, ExactLaw::Max { n: 9, k: 2, c: 0.5 });
        assert!(ExactLaw::for_statistic(&sp(&[1.0, 0.5]), ExtremalMode::MaxSigned, FieldKind::Real, 9).is_none());
    }

    #[test]
    fn exact_laws_are_distribution_functions() {
        let laws = [
            ExactLaw::Max { n: 30, k: 2, c: 1.0 },
            ExactLaw::Min { n: 30, k: 2, c: 1.0 },
            ExactLaw::NegMin { n: 30, k: 2, c: 1.0 },
            ExactLaw::NegMax { n: 30, k: 2, c: 1.0 },
        ];
        for law in laws {
            let mut prev = 0.0;
            for i in -400..=400 {
                let v = law.cdf(i as f64 * 0.1);
                assert!(v >= prev && (0.0..=1.0).contains(&v), "{law:?}");
                prev = v;
            }
            assert!(law.cdf(-1e3) < 1e-12 && law.cdf(1e3) > 1.0 - 1e-12, "{law:?}");
        }
        // χ²₂ is exponential: −min over N rows has P(S ≤ x) = e^{N x/2} for x < 0
        let w = ExactLaw::NegMin { n: 30, k: 2, c: 1.0 };
        assert!((w.cdf(-0.1) - (-1.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn fan_out_tags_replica_errors() {
        let err = fan_out(10, 2, |i| if i == 7 { Err(Error::domain("boom")) } else { Ok(i) }).unwrap_err();
        assert!(matches!(err, Error::Replica { index: 7, .. }));
        assert_eq!(fan_out(5, 3, Ok).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn normalized_is_affine_image() {
        let mut cfg = ExperimentConfig::fixed_rank(sp(&[1.0, -0.5]), 60, 120, 5);
        cfg.source = SourceSelection::Both;
        cfg.mode = ExtremalMode::MaxAbs;
        cfg.diagnostics = true;
        cfg.workers = 2;
        let r = run(&cfg).unwrap();
        assert_eq!(r.sources.len(), 2);
        for s in &r.sources {
            for (raw, norm) in s.raw.iter().zip(&s.normalized) {
                assert_eq!(*norm, r.normalization.scale * raw + r.normalization.shift);
            }
        }
        assert!(r.ks_two_sample.is_some());
        assert!(r.diagnostics_summary.is_some());
        assert!(r.exact_law.is_none());
    }

    #[test]
    fn que_normalization_matches_statistic() {
        let cfg = ExperimentConfig::from_toml_str(
            "theorem = \"que\"\ndimension = 50\nreplicas = 100\nseed = 3\nworkers = 2\nspectrum.values = [1.0, -2.0, 0.5]\n",
        )
        .unwrap();
        let r = run(&cfg).unwrap();
        let s = r.source(Source::Haar).unwrap();
        let mut stream = substream(3, 4);
        let y = gaussian_block::<f64>(50, 1, &mut stream).unwrap();
        let g = gram_schmidt_partial(&y).unwrap();
        let spec = sp(&[1.0, -2.0, 0.5]);
        let q = que_statistic(g.gamma().col(0), &spec, spec.trace(), spec.trace_sq()).unwrap();
        assert!((s.normalized[4] - q).abs() < 1e-12);
    }
}
