//! CSV, JSON and plot-data writers.
//!
//! CSV output carries only what the replicas determine (no worker count, no
//! timing), so re-running a configuration reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SpectrumSpec;
use super::run::ExperimentResult;
use crate::quadratic::Source;
use crate::stats::EmpiricalSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plotdata" => Ok(OutputFormat::Plotdata),
            other => Err(Error::arg(format!("unknown format `{other}` (csv, json, plotdata)"))),
        }
    }
}

pub const PLOT_POINTS: usize = 512;

fn source_tag(s: Source) -> &'static str {
    match s {
        Source::Haar => "haar",
        Source::Gaussian => "gaussian",
    }
}

/// 17 significant digits, enough to read back the same `f64`.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(result: &ExperimentResult) -> String {
    let c = &result.config;
    let mut h = String::new();
    let spectrum = match &c.spectrum {
        SpectrumSpec::Explicit(s) if s.k() <= 16 => format!("{:?}", s.values()),
        SpectrumSpec::Explicit(s) => format!("{} values, trace {}", s.k(), g17(s.trace())),
        SpectrumSpec::Diverging { alpha, epsilon } => format!("alpha {alpha} epsilon {epsilon} rank {}", result.rank),
    };
    let norm = &result.normalization;
    let lines = [
        ("field", c.field.to_string()),
        ("source", format!("{:?}", c.source).to_lowercase()),
        ("theorem", format!("{:?}", c.theorem)),
        ("mode", c.mode.as_str().to_string()),
        ("spectrum", spectrum),
        ("dimension", c.dimension.to_string()),
        ("replicas", c.replicas.to_string()),
        ("seed", format!("{} (0x{:x})", c.seed, c.seed)),
        ("scale", g17(norm.scale)),
        ("shift", g17(norm.shift)),
        ("law", format!("{:?}", norm.law)),
    ];
    for (k, v) in lines {
        let _ = writeln!(h, "# {k} = {v}");
    }
    h
}

pub fn to_csv(result: &ExperimentResult) -> String {
    let mut out = header(result);
    let cols: Vec<String> = result
        .sources
        .iter()
        .flat_map(|s| {
            let t = source_tag(s.source);
            if result.sources.len() == 1 {
                vec!["raw".to_string(), "normalized".to_string()]
            } else {
                vec![format!("raw_{t}"), format!("normalized_{t}")]
            }
        })
        .collect();
    out.push_str("replica_index,");
    out.push_str(&cols.join(","));
    out.push_str("\r\n");
    let m = result.sources.first().map_or(0, |s| s.raw.len());
    for i in 0..m {
        let _ = write!(out, "{i}");
        for s in &result.sources {
            let _ = write!(out, ",{},{}", g17(s.raw[i]), g17(s.normalized[i]));
        }
        out.push_str("\r\n");
    }
    out
}

pub fn to_json(result: &ExperimentResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

pub fn from_json(text: &str) -> Result<ExperimentResult> {
    Ok(serde_json::from_str(text)?)
}

/// `x`, one ECDF column per source, and the limit-law CDF, on a uniform grid
/// spanning the normalized samples.
pub fn to_plotdata(result: &ExperimentResult) -> Result<String> {
    let samples: Vec<(Source, EmpiricalSample)> = result
        .sources
        .iter()
        .map(|s| Ok((s.source, EmpiricalSample::new(s.normalized.clone())?)))
        .collect::<Result<_>>()?;
    let (mut lo, mut hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (_, s)| {
            (l.min(s.sorted()[0]), h.max(s.sorted()[s.len() - 1]))
        });
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let mut out = header(result);
    out.push('x');
    for (s, _) in &samples {
        let _ = write!(out, " ecdf_{}", source_tag(*s));
    }
    out.push_str(" limit_cdf\n");
    let law = result.normalization.law;
    for i in 0..PLOT_POINTS {
        let x = lo + (hi - lo) * i as f64 / (PLOT_POINTS - 1) as f64;
        let _ = write!(out, "{}", g17(x));
        for (_, s) in &samples {
            let _ = write!(out, " {}", g17(s.ecdf(x)));
        }
        let _ = writeln!(out, " {}", g17(law.cdf(x)));
    }
    Ok(out)
}

pub fn render(result: &ExperimentResult, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(result)),
        OutputFormat::Json => to_json(result),
        OutputFormat::Plotdata => to_plotdata(result),
    }
}

pub fn emit(result: &ExperimentResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
