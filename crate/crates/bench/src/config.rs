//! Experiment configuration, from flat `key = value` text or CLI flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use predfl::{Algorithm, PredictorKind, DEFAULT_EPSILON, DEFAULT_MAX_EXACT};

use crate::error::{BenchError, Result};
use crate::ingest::ColumnMask;

pub const DEFAULT_EXTENT: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    File { path: PathBuf, columns: ColumnMask },
    /// `n` uniform points on `[0, extent]^2`.
    Uniform { n: usize, extent: f64 },
}

impl DatasetSource {
    /// `uniform:N[:EXTENT]` or a file path.
    pub fn parse(s: &str, columns: ColumnMask) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("uniform:") {
            let mut parts = rest.split(':');
            let n = parts
                .next()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&n: &usize| n >= 1)
                .ok_or_else(|| BenchError::Config(format!("bad synthetic dataset {s:?}")))?;
            let extent = match parts.next() {
                Some(e) => e.trim().parse().map_err(|_| BenchError::Config(format!("bad extent in {s:?}")))?,
                None => DEFAULT_EXTENT,
            };
            if !(extent > 0.0 && f64::is_finite(extent)) || parts.next().is_some() {
                return Err(BenchError::Config(format!("bad synthetic dataset {s:?}")));
            }
            return Ok(DatasetSource::Uniform { n, extent });
        }
        if s.is_empty() {
            return Err(BenchError::Config("empty dataset".into()));
        }
        Ok(DatasetSource::File { path: PathBuf::from(s), columns })
    }

    /// Short name written into every row.
    pub fn label(&self) -> String {
        match self {
            DatasetSource::File { path, .. } => {
                path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
            }
            DatasetSource::Uniform { n, extent } => format!("uniform-{n}-{extent}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FacilityCostPolicy {
    Fixed(f64),
    /// Batch diameter divided by this.
    DiameterFraction(f64),
}

impl FromStr for FacilityCostPolicy {
    type Err = BenchError;

    /// A positive number, `auto` (diameter / 10) or `diameter/K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || BenchError::Config(format!("bad facility cost {s:?}"));
        let policy = if s == "auto" {
            FacilityCostPolicy::DiameterFraction(10.0)
        } else if let Some(k) = s.strip_prefix("diameter/") {
            FacilityCostPolicy::DiameterFraction(k.trim().parse().map_err(|_| bad())?)
        } else {
            FacilityCostPolicy::Fixed(s.parse().map_err(|_| bad())?)
        };
        let v = match policy {
            FacilityCostPolicy::Fixed(v) | FacilityCostPolicy::DiameterFraction(v) => v,
        };
        if v > 0.0 && v.is_finite() {
            Ok(policy)
        } else {
            Err(bad())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmChoice {
    Single(Algorithm),
    /// MIN over PredFL and Meyerson.
    Min,
}

impl AlgorithmChoice {
    pub fn needs_predictions(self) -> bool {
        match self {
            AlgorithmChoice::Single(a) => a.needs_predictions(),
            AlgorithmChoice::Min => true,
        }
    }
}

impl fmt::Display for AlgorithmChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmChoice::Single(a) => write!(f, "{a}"),
            AlgorithmChoice::Min => f.write_str("min"),
        }
    }
}

impl FromStr for AlgorithmChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("min") {
            return Ok(AlgorithmChoice::Min);
        }
        s.parse::<Algorithm>().map(AlgorithmChoice::Single).map_err(BenchError::from)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aggregation {
    Max,
    Mean,
    #[default]
    Both,
}

impl FromStr for Aggregation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            "both" => Ok(Aggregation::Both),
            other => Err(BenchError::Config(format!("unknown aggregation {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(BenchError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub limit: Option<usize>,
    pub batch_size: usize,
    pub facility_cost: FacilityCostPolicy,
    pub algorithms: Vec<AlgorithmChoice>,
    pub predictors: Vec<PredictorKind>,
    pub alphas: Vec<f64>,
    /// Only Gaussian predictor kinds sweep these; other kinds run once with std 0.
    pub stds: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub agg: Aggregation,
    /// Batches up to this size are solved exactly.
    pub max_exact: usize,
    pub epsilon: f64,
    /// Record per-cell wall time. Off by default so output is reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::Uniform { n: 2000, extent: DEFAULT_EXTENT },
            limit: None,
            batch_size: 1000,
            facility_cost: FacilityCostPolicy::DiameterFraction(10.0),
            algorithms: vec![AlgorithmChoice::Single(Algorithm::PredFl), AlgorithmChoice::Single(Algorithm::Meyerson)],
            predictors: vec![PredictorKind::Alpha],
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            stds: vec![0.1],
            trials: 20,
            seed: 0,
            agg: Aggregation::Both,
            max_exact: DEFAULT_MAX_EXACT,
            epsilon: DEFAULT_EPSILON,
            timing: false,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

pub const KEYS: &[&str] = &[
    "dataset",
    "columns",
    "limit",
    "batch-size",
    "facility-cost",
    "algorithms",
    "predictor",
    "alphas",
    "stds",
    "trials",
    "seed",
    "agg",
    "max-exact",
    "epsilon",
    "timing",
    "out",
    "format",
];

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| BenchError::Config(format!("bad {key} entry {:?}", s.trim()))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(BenchError::Config(format!("{key} is empty")));
    }
    Ok(items)
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| BenchError::Config(format!("bad {key} value {v:?}")))
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", no + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(BenchError::Config(format!("line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key, v.trim().to_owned());
    }
    Ok(map)
}

impl ExperimentConfig {
    /// Defaults overridden by the given keys.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(BenchError::Config(format!("unknown key {k:?}")));
        }
        let columns = match map.get("columns") {
            Some(v) => v.parse()?,
            None => ColumnMask::All,
        };
        if let Some(v) = map.get("dataset") {
            c.dataset = DatasetSource::parse(v, columns)?;
        } else if columns != ColumnMask::All {
            return Err(BenchError::Config("columns given without a dataset file".into()));
        }
        for (key, v) in map {
            match key.as_str() {
                "limit" => c.limit = Some(scalar(key, v)?),
                "batch-size" => c.batch_size = scalar(key, v)?,
                "facility-cost" => c.facility_cost = v.parse()?,
                "algorithms" => c.algorithms = list(key, v)?,
                "predictor" => c.predictors = list(key, v)?,
                "alphas" => c.alphas = list(key, v)?,
                "stds" => c.stds = list(key, v)?,
                "trials" => c.trials = scalar(key, v)?,
                "seed" => c.seed = scalar(key, v)?,
                "agg" => c.agg = v.parse()?,
                "max-exact" => c.max_exact = scalar(key, v)?,
                "epsilon" => c.epsilon = scalar(key, v)?,
                "timing" => c.timing = scalar(key, v)?,
                "out" => c.out = Some(PathBuf::from(v)),
                "format" => c.format = v.parse()?,
                _ => {}
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BenchError::Config(m));
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if self.batch_size < 1 {
            return fail("batch size must be at least 1".into());
        }
        if self.limit == Some(0) {
            return fail("limit must be at least 1".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return fail(format!("alpha {a} outside [0,1]"));
        }
        if let Some(s) = self.stds.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return fail(format!("std {s} must be non-negative"));
        }
        if self.algorithms.is_empty() || self.predictors.is_empty() || self.alphas.is_empty() || self.stds.is_empty() {
            return fail("algorithms, predictors, alphas and stds must be non-empty".into());
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return fail(format!("epsilon {} must be non-negative", self.epsilon));
        }
        Ok(())
    }
}
