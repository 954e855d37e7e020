//! Experiment configuration: a flat TOML document with dotted keys.
//!
//! ```toml
//! field = "real"            # real | complex
//! source = "both"           # haar | gaussian | both
//! theorem = "fixed_rank"    # fixed_rank | rank_one | diverging_rank | que
//! mode = "max_signed"       # max_signed | max_abs | min
//! dimension = 2000
//! replicas = 5000
//! seed = "0x5eed"           # integer or decimal/hex string
//! workers = 8
//! diagnostics = false
//! spectrum.values = [1.0, 1.0, -1.0]
//! # spectrum.rank = 500     # shorthand for `rank` ones
//! # spectrum.alpha = 0.3    # diverging_rank: k_N = round(N^alpha)
//! # spectrum.epsilon = 0.05
//! acceptance.ks_two_sample = 0.04
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::field::FieldKind;
use crate::quadratic::{ExtremalMode, Spectrum};
use crate::rng::parse_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceSelection {
    Haar,
    Gaussian,
    Both,
}

impl SourceSelection {
    pub fn includes_haar(self) -> bool {
        matches!(self, SourceSelection::Haar | SourceSelection::Both)
    }

    pub fn includes_gaussian(self) -> bool {
        matches!(self, SourceSelection::Gaussian | SourceSelection::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Fixed spectrum, Gumbel or Weibull limit.
    FixedRank,
    /// Spectrum `(1)`: `max N⟨u, q⟩²`.
    RankOne,
    /// Projection of rank `round(N^α)`.
    DivergingRank,
    /// QUE fluctuation of the first column, standard normal limit.
    Que,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSpec {
    Explicit(Spectrum),
    Diverging { alpha: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceThresholds {
    pub ks_vs_limit: Option<f64>,
    pub ks_vs_exact: Option<f64>,
    pub ks_two_sample: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub field: FieldKind,
    pub source: SourceSelection,
    pub theorem: Theorem,
    pub mode: ExtremalMode,
    pub spectrum: SpectrumSpec,
    pub dimension: usize,
    pub replicas: usize,
    pub seed: u64,
    pub diagnostics: bool,
    pub workers: usize,
    pub acceptance: AcceptanceThresholds,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    /// Small fixed-rank configuration; adjust fields and call [`validate`](Self::validate).
    pub fn fixed_rank(spectrum: Spectrum, dimension: usize, replicas: usize, seed: u64) -> Self {
        Self {
            field: FieldKind::Real,
            source: SourceSelection::Haar,
            theorem: Theorem::FixedRank,
            mode: ExtremalMode::MaxSigned,
            spectrum: SpectrumSpec::Explicit(spectrum),
            dimension,
            replicas,
            seed,
            diagnostics: false,
            workers: default_workers(),
            acceptance: AcceptanceThresholds::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        let cfg = Parser::new(table).parse()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Rank used by the replicas (`round(N^α)` for diverging rank).
    pub fn rank(&self) -> usize {
        match &self.spectrum {
            SpectrumSpec::Explicit(s) => s.k(),
            SpectrumSpec::Diverging { alpha, .. } => ((self.dimension as f64).powf(*alpha).round() as usize).max(1),
        }
    }

    pub fn resolved_spectrum(&self) -> Result<Spectrum> {
        match &self.spectrum {
            SpectrumSpec::Explicit(s) => Ok(s.clone()),
            SpectrumSpec::Diverging { .. } => Spectrum::ones(self.rank()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(Error::config("dimension", "must be at least 3"));
        }
        if self.replicas == 0 {
            return Err(Error::config("replicas", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        match (&self.theorem, &self.spectrum) {
            (Theorem::DivergingRank, SpectrumSpec::Diverging { alpha, epsilon }) => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::config("spectrum.alpha", "must lie in (0, 1)"));
                }
                if self.source.includes_haar() && *alpha >= 0.5 {
                    return Err(Error::config(
                        "spectrum.alpha",
                        "Haar sources need alpha < 1/2; use source = \"gaussian\" above",
                    ));
                }
                if !(*epsilon >= 0.0) {
                    return Err(Error::config("spectrum.epsilon", "must be nonnegative"));
                }
                if self.field != FieldKind::Real {
                    return Err(Error::config("field", "diverging_rank is defined for the real field"));
                }
                if self.mode != ExtremalMode::MaxSigned {
                    return Err(Error::config("mode", "diverging_rank uses max_signed"));
                }
            }
            (Theorem::DivergingRank, _) => {
                return Err(Error::config("spectrum.alpha", "required for diverging_rank"));
            }
            (_, SpectrumSpec::Diverging { .. }) => {
                return Err(Error::config("spectrum.alpha", "only valid for diverging_rank"));
            }
            (Theorem::RankOne, SpectrumSpec::Explicit(s)) => {
                if s.values() != [1.0] {
                    return Err(Error::config("spectrum.values", "rank_one uses the spectrum [1.0]"));
                }
                if self.mode != ExtremalMode::MaxSigned {
                    return Err(Error::config("mode", "rank_one uses max_signed"));
                }
            }
            (Theorem::Que, SpectrumSpec::Explicit(s)) => {
                if self.source != SourceSelection::Haar {
                    return Err(Error::config("source", "que is evaluated on Haar columns only"));
                }
                if s.k() > self.dimension {
                    return Err(Error::config("spectrum", "rank exceeds dimension"));
                }
            }
            (Theorem::FixedRank, SpectrumSpec::Explicit(_)) => {}
        }
        if self.theorem != Theorem::Que && self.source.includes_haar() && self.rank() > self.dimension {
            return Err(Error::config("spectrum", "rank exceeds dimension"));
        }
        if let Some(bad) = [
            ("acceptance.ks_vs_limit", self.acceptance.ks_vs_limit),
            ("acceptance.ks_vs_exact", self.acceptance.ks_vs_exact),
            ("acceptance.ks_two_sample", self.acceptance.ks_two_sample),
        ]
        .into_iter()
        .find(|(_, v)| v.is_some_and(|v| !(v > 0.0 && v <= 1.0)))
        {
            return Err(Error::config(bad.0, "threshold must lie in (0, 1]"));
        }
        if self.acceptance.ks_two_sample.is_some() && self.source != SourceSelection::Both {
            return Err(Error::config("acceptance.ks_two_sample", "needs source = \"both\""));
        }
        Ok(())
    }
}

/// Walks the TOML table, removing keys as they are read so leftovers can be
/// reported as unknown.
struct Parser {
    table: Table,
}

fn type_error(path: &str, expected: &str, got: &Value) -> Error {
    Error::config(path, format!("expected {expected}, found {}", got.type_str()))
}

impl Parser {
    fn new(table: Table) -> Self {
        Self { table }
    }

    fn take(&mut self, path: &str) -> Option<Value> {
        let mut parts = path.split('.').peekable();
        let mut table = &mut self.table;
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                return table.remove(part);
            }
            table = match table.get_mut(part) {
                Some(Value::Table(t)) => t,
                _ => return None,
            };
        }
        None
    }

    fn string(&mut self, path: &str) -> Result<Option<String>> {
        match self.take(path) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(type_error(path, "a string", &v)),
        }
    }

    fn integer(&mut self, path: &str) -> Result<Option<usize>> {
        match self.take(path) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(Value::Integer(i)) => Err(Error::config(path, format!("must be nonnegative, got {i}"))),
            Some(v) => Err(type_error(path, "an integer", &v)),
        }
    }

    fn float(&mut self, path: &str) -> Result<Option<f64>> {
        match self.take(path) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(f)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(v) => Err(type_error(path, "a number", &v)),
        }
    }

    fn boolean(&mut self, path: &str) -> Result<Option<bool>> {
        match self.take(path) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(b)),
            Some(v) => Err(type_error(path, "a boolean", &v)),
        }
    }

    fn enumerated<T: for<'de> Deserialize<'de>>(&mut self, path: &str, choices: &str) -> Result<Option<T>> {
        match self.string(path)? {
            None => Ok(None),
            Some(s) => T::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(&s))
                .map(Some)
                .map_err(|_| Error::config(path, format!("unknown value `{s}`; expected one of {choices}"))),
        }
    }

    fn required<T>(path: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| Error::config(path, "missing required key"))
    }

    fn parse(mut self) -> Result<ExperimentConfig> {
        let field = self.enumerated("field", "real, complex")?.unwrap_or(FieldKind::Real);
        let source = self
            .enumerated("source", "haar, gaussian, both")?
            .unwrap_or(SourceSelection::Haar);
        let theorem = self.enumerated::<Theorem>("theorem", "fixed_rank, rank_one, diverging_rank, que")?;
        let mode = self
            .enumerated("mode", "max_signed, max_abs, min")?
            .unwrap_or(ExtremalMode::MaxSigned);
        let dimension = self.integer("dimension")?;
        let replicas = self.integer("replicas")?;
        let seed = match self.take("seed") {
            None => None,
            Some(Value::Integer(i)) if i >= 0 => Some(i as u64),
            Some(Value::String(s)) => Some(parse_seed(&s).map_err(|e| Error::config("seed", e.to_string()))?),
            Some(v) => return Err(type_error("seed", "a nonnegative integer or string", &v)),
        };
        let diagnostics = self.boolean("diagnostics")?.unwrap_or(false);
        let workers = self.integer("workers")?.unwrap_or_else(default_workers);

        let values = match self.take("spectrum.values") {
            None => None,
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Value::Float(f) => Ok(*f),
                        Value::Integer(n) => Ok(*n as f64),
                        other => Err(type_error(&format!("spectrum.values[{i}]"), "a number", other)),
                    })
                    .collect::<Result<Vec<f64>>>()?,
            ),
            Some(v) => return Err(type_error("spectrum.values", "an array", &v)),
        };
        let rank = self.integer("spectrum.rank")?;
        let alpha = self.float("spectrum.alpha")?;
        let epsilon = self.float("spectrum.epsilon")?;

        let acceptance = AcceptanceThresholds {
            ks_vs_limit: self.float("acceptance.ks_vs_limit")?,
            ks_vs_exact: self.float("acceptance.ks_vs_exact")?,
            ks_two_sample: self.float("acceptance.ks_two_sample")?,
        };

        // unknown keys first: a misspelled key would otherwise surface as a missing one
        if let Some(path) = leftover_key(&self.table, "") {
            return Err(Error::config(path, "unknown key"));
        }

        let theorem = Self::required("theorem", theorem)?;
        let dimension = Self::required("dimension", dimension)?;
        let replicas = Self::required("replicas", replicas)?;
        let seed = Self::required("seed", seed)?;

        let spectrum = match (values, rank, alpha) {
            (Some(v), None, None) => {
                SpectrumSpec::Explicit(Spectrum::new(v).map_err(|e| Error::config("spectrum.values", e.to_string()))?)
            }
            (None, Some(k), None) => {
                SpectrumSpec::Explicit(Spectrum::ones(k).map_err(|e| Error::config("spectrum.rank", e.to_string()))?)
            }
            (None, None, Some(alpha)) => SpectrumSpec::Diverging {
                alpha,
                epsilon: epsilon.unwrap_or(0.0),
            },
            (None, None, None) if theorem == Theorem::RankOne => {
                SpectrumSpec::Explicit(Spectrum::ones(1).expect("rank one"))
            }
            (None, None, None) => {
                return Err(Error::config(
                    "spectrum",
                    "one of spectrum.values, spectrum.rank or spectrum.alpha is required",
                ))
            }
            _ => {
                return Err(Error::config(
                    "spectrum",
                    "give exactly one of spectrum.values, spectrum.rank, spectrum.alpha",
                ))
            }
        };
        if epsilon.is_some() && !matches!(spectrum, SpectrumSpec::Diverging { .. }) {
            return Err(Error::config("spectrum.epsilon", "only valid with spectrum.alpha"));
        }

        Ok(ExperimentConfig {
            field,
            source,
            theorem,
            mode,
            spectrum,
            dimension,
            replicas,
            seed,
            diagnostics,
            workers,
            acceptance,
        })
    }
}

fn leftover_key(table: &Table, prefix: &str) -> Option<String> {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            Value::Table(t) => {
                if let Some(p) = leftover_key(t, &path) {
                    return Some(p);
                }
            }
            _ => return Some(path),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        field = "real"
        source = "both"
        theorem = "fixed_rank"
        mode = "max_abs"
        dimension = 2000
        replicas = 5000
        seed = "0x2A"
        workers = 4
        spectrum.values = [1.0, 1, -1.0]
        acceptance.ks_two_sample = 0.04
    "#;

    fn path_of(e: Error) -> String {
        match e {
            Error::Config { path, .. } => path,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn parses_full_document() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.mode, ExtremalMode::MaxAbs);
        assert_eq!(c.source, SourceSelection::Both);
        assert_eq!(c.resolved_spectrum().unwrap().values(), &[1.0, 1.0, -1.0]);
        assert_eq!(c.acceptance.ks_two_sample, Some(0.04));
        assert!(!c.diagnostics);
    }

    #[test]
    fn nested_table_form_is_equivalent() {
        let text = BASE.replace("spectrum.values = [1.0, 1, -1.0]", "") + "\n[spectrum]\nvalues = [1.0, 1.0, -1.0]\n";
        let text = text.replace("acceptance.ks_two_sample = 0.04", "");
        let text = text.replace("[spectrum]", "acceptance.ks_two_sample = 0.04\n[spectrum]");
        assert_eq!(
            ExperimentConfig::from_toml_str(&text).unwrap(),
            ExperimentConfig::from_toml_str(BASE).unwrap()
        );
    }

    #[test]
    fn errors_carry_field_paths() {
        let cases = [
            (BASE.replace("field = \"real\"", "field = \"quaternion\""), "field"),
            (BASE.replace("dimension = 2000", "dimension = \"big\""), "dimension"),
            (BASE.replace("dimension = 2000", ""), "dimension"),
            (BASE.replace("[1.0, 1, -1.0]", "[1.0, 0.0]"), "spectrum.values"),
            (BASE.replace("[1.0, 1, -1.0]", "[1.0, \"x\"]"), "spectrum.values[1]"),
            (BASE.replace("seed = \"0x2A\"", "seed = \"0xZZ\""), "seed"),
            (BASE.to_string() + "\nspectrum.colour = 3\n", "spectrum.colour"),
            (
                BASE.replace("source = \"both\"", "source = \"haar\""),
                "acceptance.ks_two_sample",
            ),
            (BASE.replace("dimension = 2000", "dimension = 2"), "dimension"),
            (BASE.replace("workers = 4", "workers = 0"), "workers"),
        ];
        for (text, want) in cases {
            assert_eq!(
                path_of(ExperimentConfig::from_toml_str(&text).unwrap_err()),
                want,
                "{text}"
            );
        }
    }

    #[test]
    fn diverging_rank_rules() {
        let doc = |alpha: f64, source: &str| {
            format!(
                "theorem = \"diverging_rank\"\nsource = \"{source}\"\ndimension = 4000\nreplicas = 100\nseed = 1\nspectrum.alpha = {alpha}\nspectrum.epsilon = 0.01\n"
            )
        };
        let c = ExperimentConfig::from_toml_str(&doc(0.3, "gaussian")).unwrap();
        assert_eq!(c.rank(), 12);
        assert!(ExperimentConfig::from_toml_str(&doc(0.7, "gaussian")).is_ok());
        assert_eq!(
            path_of(ExperimentConfig::from_toml_str(&doc(0.7, "haar")).unwrap_err()),
            "spectrum.alpha"
        );
        assert_eq!(
            path_of(ExperimentConfig::from_toml_str(&doc(1.0, "gaussian")).unwrap_err()),
            "spectrum.alpha"
        );
    }

    #[test]
    fn rank_one_defaults_spectrum() {
        let c = ExperimentConfig::from_toml_str(
            "theorem = \"rank_one\"\nfield = \"complex\"\ndimension = 1000\nreplicas = 100\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(c.resolved_spectrum().unwrap().values(), &[1.0]);
    }

    #[test]
    fn rank_shorthand() {
        let c = ExperimentConfig::from_toml_str(
            "theorem = \"que\"\ndimension = 1000\nreplicas = 100\nseed = 3\nspectrum.rank = 500\n",
        )
        .unwrap();
        assert_eq!(c.rank(), 500);
    }
}
