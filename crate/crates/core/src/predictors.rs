//! Synthetic prediction generators and prediction-error profiles.
//!
//! Every generator places `f̂_x` relative to the demand's offline center
//! `c*_x`. The interpolation fraction `g` measures distance from the center:
//! `g = 0` is a perfect prediction and `g = 1` predicts the demand itself.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};
use crate::offline::{optimal_center_of, Instance, OfflineSolution};
use crate::seed::{derive_seed, rng_from};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictorKind {
    Alpha,
    AlphaGaussian,
    PerturbGaussian,
    RandomAlpha,
    RandomPerturb,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 5] = [
        PredictorKind::Alpha,
        PredictorKind::AlphaGaussian,
        PredictorKind::PerturbGaussian,
        PredictorKind::RandomAlpha,
        PredictorKind::RandomPerturb,
    ];

    /// Stable tag mixed into seeds.
    pub fn tag(self) -> u64 {
        match self {
            PredictorKind::Alpha => 1,
            PredictorKind::AlphaGaussian => 2,
            PredictorKind::PerturbGaussian => 3,
            PredictorKind::RandomAlpha => 4,
            PredictorKind::RandomPerturb => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Alpha => "alpha",
            PredictorKind::AlphaGaussian => "alpha_gaussian",
            PredictorKind::PerturbGaussian => "perturb_gaussian",
            PredictorKind::RandomAlpha => "random_alpha",
            PredictorKind::RandomPerturb => "random_perturb",
        }
    }

    fn gaussian(self) -> bool {
        matches!(self, PredictorKind::AlphaGaussian | PredictorKind::PerturbGaussian | PredictorKind::RandomPerturb)
    }

    fn reflected(self) -> bool {
        matches!(self, PredictorKind::RandomAlpha | PredictorKind::RandomPerturb)
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_suffix("_predictor").unwrap_or(&s);
        PredictorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown predictor {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub alpha: f64,
    /// Standard deviation of `g ~ Normal(alpha, std)`; ignored by non-Gaussian kinds.
    pub std: f64,
}

impl PredictorSpec {
    pub fn new(kind: PredictorKind, alpha: f64, std: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0,1]")));
        }
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::InvalidParameter(format!("std {std} must be non-negative")));
        }
        Ok(PredictorSpec { kind, alpha, std })
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        Self::new(PredictorKind::Alpha, alpha, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: PredictorSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSequence {
    pub locations: Vec<Location>,
    pub provenance: Option<Provenance>,
}

impl PredictionSequence {
    pub fn from_locations(locations: Vec<Location>) -> Self {
        PredictionSequence { locations, provenance: None }
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// One location per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for loc in &self.locations {
            out.push_str(&loc.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let locations = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Location>>>()?;
        Ok(Self::from_locations(locations))
    }
}

fn sample_fraction(spec: &PredictorSpec, normal: Option<&Normal<f64>>, rng: &mut ChaCha8Rng) -> f64 {
    match normal {
        Some(n) => n.sample(rng).clamp(0.0, 1.0),
        None => spec.alpha,
    }
}

/// `center + g * (s ⊙ (demand - center))` with `s` a uniform ±1 vector.
fn reflect(center: &[f64], demand: &[f64], g: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    center
        .iter()
        .zip(demand)
        .map(|(c, x)| {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            c + g * (s * (x - c))
        })
        .collect()
}

/// Predictions for every demand, drawn from one stream seeded by
/// `(seed, kind)` and consumed in demand order.
pub fn generate_predictions(
    instance: &Instance,
    offline: &OfflineSolution,
    spec: &PredictorSpec,
    seed: u64,
) -> Result<PredictionSequence> {
    let spec = PredictorSpec::new(spec.kind, spec.alpha, spec.std)?;
    if offline.assignment.len() != instance.len() {
        return Err(Error::LengthMismatch { expected: instance.len(), found: offline.assignment.len() });
    }
    let euclidean = matches!(instance.space, MetricSpace::Euclidean { .. });
    let needs_vectors = !matches!(spec.kind, PredictorKind::Alpha | PredictorKind::AlphaGaussian);
    if needs_vectors && !euclidean {
        return Err(Error::Unsupported(format!("{} predictor needs a Euclidean space", spec.kind)));
    }

    let mut rng = rng_from(derive_seed(seed, &[spec.kind.tag()]));
    let normal = if spec.kind.gaussian() {
        Some(Normal::new(spec.alpha, spec.std).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };

    let mut locations = Vec::with_capacity(instance.len());
    for (i, demand) in instance.demands.iter().enumerate() {
        let center = optimal_center_of(offline, i)?;
        let g = sample_fraction(&spec, normal.as_ref(), &mut rng);
        let loc = if spec.kind.reflected() {
            let (Some(c), Some(x)) = (center.coords(), demand.coords()) else {
                return Err(Error::Unsupported("reflection needs point coordinates".into()));
            };
            Location::Point(reflect(c, x, g, &mut rng))
        } else {
            instance.space.interpolate(center, demand, g)?
        };
        locations.push(loc);
    }
    Ok(PredictionSequence { locations, provenance: Some(Provenance { spec, seed }) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub per_demand: Vec<f64>,
    pub eta1: f64,
    pub eta_inf: f64,
    /// `eta1 / f`
    pub err1: f64,
    /// `n * eta_inf / f`
    pub err_inf: f64,
}

impl ErrorProfile {
    pub fn from_errors(per_demand: Vec<f64>, facility_cost: f64) -> Self {
        let eta1: f64 = per_demand.iter().sum();
        let eta_inf = per_demand.iter().copied().fold(0.0, f64::max);
        let n = per_demand.len() as f64;
        ErrorProfile { eta1, eta_inf, err1: eta1 / facility_cost, err_inf: n * eta_inf / facility_cost, per_demand }
    }
}

/// `eta_x = d(f̂_x, c*_x)` for every demand, with aggregates.
pub fn compute_errors(
    instance: &Instance,
    offline: &OfflineSolution,
    predictions: &PredictionSequence,
) -> Result<ErrorProfile> {
    if predictions.len() != instance.len() {
        return Err(Error::LengthMismatch { expected: instance.len(), found: predictions.len() });
    }
    let per_demand = predictions
        .locations
        .iter()
        .enumerate()
        .map(|(i, p)| instance.space.distance(p, optimal_center_of(offline, i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorProfile::from_errors(per_demand, instance.facility_cost))
}
