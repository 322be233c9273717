//! Online execution of Meyerson's algorithm and PredFL with a full cost ledger.
//!
//! Every step consumes exactly one uniform draw, whatever branch it takes,
//! so two algorithms fed the same seed see aligned random streams.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{nearest, Location, MetricSpace};
use crate::offline::{Instance, OfflineSolution};
use crate::predictors::PredictionSequence;
use crate::seed::rng_from;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Meyerson,
    PredFl,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Meyerson => "meyerson",
            Algorithm::PredFl => "predfl",
        }
    }

    pub fn needs_predictions(self) -> bool {
        self == Algorithm::PredFl
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "meyerson" | "ofl" => Ok(Algorithm::Meyerson),
            "predfl" => Ok(Algorithm::PredFl),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// What happened to one demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub demand_index: usize,
    pub opened: Option<Location>,
    pub assigned_to: Location,
    pub step_cost: f64,
    pub open_probability_used: f64,
}

/// Open facilities (insertion ordered) and the running cost ledger.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OnlineState {
    pub open: Vec<Location>,
    pub fcost: f64,
    pub acost: f64,
    pub trace: Vec<DecisionRecord>,
}

impl OnlineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> f64 {
        self.fcost + self.acost
    }

    /// Opens at `site` iff `draw < probability`, then connects the demand to
    /// the nearest facility of the updated set.
    #[allow(clippy::too_many_arguments)]
    fn settle(
        &mut self,
        space: &MetricSpace,
        demand_index: usize,
        demand: &Location,
        site: &Location,
        probability: f64,
        draw: f64,
        f: f64,
        before: Option<(usize, f64)>,
    ) -> Result<()> {
        let opened = if draw < probability {
            self.open.push(site.clone());
            self.fcost += f;
            Some(site.clone())
        } else {
            None
        };
        // An existing facility keeps a tie against the new one (lower index wins).
        let (index, distance) = match (before, &opened) {
            (Some((i, d)), Some(site)) => {
                let ds = space.distance(demand, site)?;
                if ds < d {
                    (self.open.len() - 1, ds)
                } else {
                    (i, d)
                }
            }
            (Some(b), None) => b,
            (None, Some(site)) => (self.open.len() - 1, space.distance(demand, site)?),
            (None, None) => unreachable!("an empty facility set always opens"),
        };
        self.acost += distance;
        let step_cost = distance + if opened.is_some() { f } else { 0.0 };
        self.trace.push(DecisionRecord {
            demand_index,
            opened,
            assigned_to: self.open[index].clone(),
            step_cost,
            open_probability_used: probability,
        });
        Ok(())
    }

    fn nearest_open(&self, space: &MetricSpace, demand: &Location) -> Result<Option<(usize, f64)>> {
        if self.open.is_empty() {
            return Ok(None);
        }
        let n = nearest(space, demand, &self.open)?;
        Ok(Some((n.index, n.distance)))
    }

    /// Meyerson: open at the demand with probability `min(δ/f, 1)`, where δ is
    /// the distance to the nearest open facility (probability 1 when none is open).
    pub fn meyerson_step(
        &mut self,
        space: &MetricSpace,
        demand_index: usize,
        demand: &Location,
        f: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let draw: f64 = rng.random();
        let before = self.nearest_open(space, demand)?;
        let probability = match before {
            None => 1.0,
            Some((_, delta)) => (delta / f).min(1.0),
        };
        self.settle(space, demand_index, demand, demand, probability, draw, f, before)
    }

    /// PredFL: a prediction farther than `f` from its demand opens a facility
    /// at the demand outright. Otherwise the prediction is opened with
    /// probability `min(r/f, 1)`, `r` being the distance from the prediction
    /// to the facility nearest the demand. With no facility open yet the
    /// prediction is opened with probability 1.
    pub fn predfl_step(
        &mut self,
        space: &MetricSpace,
        demand_index: usize,
        demand: &Location,
        prediction: &Location,
        f: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let draw: f64 = rng.random();
        let before = self.nearest_open(space, demand)?;
        if space.distance(demand, prediction)? > f {
            return self.settle(space, demand_index, demand, demand, 1.0, draw, f, before);
        }
        let probability = match before {
            None => 1.0,
            Some((i, _)) => (space.distance(&self.open[i], prediction)? / f).min(1.0),
        };
        self.settle(space, demand_index, demand, prediction, probability, draw, f, before)
    }
}

/// One algorithm advancing through an instance with its own random stream.
pub struct OnlineRunner<'a> {
    pub algorithm: Algorithm,
    instance: &'a Instance,
    predictions: Option<&'a PredictionSequence>,
    rng: ChaCha8Rng,
    next: usize,
    pub state: OnlineState,
}

impl<'a> OnlineRunner<'a> {
    pub fn new(
        algorithm: Algorithm,
        instance: &'a Instance,
        predictions: Option<&'a PredictionSequence>,
        seed: u64,
    ) -> Result<Self> {
        if algorithm.needs_predictions() {
            let p = predictions.ok_or(Error::MissingPredictions(algorithm.name()))?;
            if p.len() != instance.len() {
                return Err(Error::LengthMismatch { expected: instance.len(), found: p.len() });
            }
            for loc in &p.locations {
                instance.space.check(loc)?;
            }
        }
        Ok(OnlineRunner { algorithm, instance, predictions, rng: rng_from(seed), next: 0, state: OnlineState::new() })
    }

    pub fn is_done(&self) -> bool {
        self.next >= self.instance.len()
    }

    /// Processes the next demand and returns its decision record.
    pub fn step(&mut self) -> Result<&DecisionRecord> {
        let t = self.next;
        let inst = self.instance;
        let demand = inst.demands.get(t).ok_or(Error::IndexOutOfRange { index: t, len: inst.len() })?;
        match self.algorithm {
            Algorithm::Meyerson => {
                self.state.meyerson_step(&inst.space, t, demand, inst.facility_cost, &mut self.rng)?
            }
            Algorithm::PredFl => {
                let pred = &self.predictions.expect("checked in new").locations[t];
                self.state.predfl_step(&inst.space, t, demand, pred, inst.facility_cost, &mut self.rng)?
            }
        }
        self.next += 1;
        Ok(self.state.trace.last().expect("just pushed"))
    }

    pub fn finish(mut self, seed: u64) -> Result<RunResult> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(RunResult::from_state(self.algorithm.name().to_string(), seed, self.state))
    }
}

/// Follow/switch audit trail of a MIN combination run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowStep {
    pub demand_index: usize,
    pub followed: usize,
    pub charged: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    /// Index of the demand after which the switch happened.
    pub after_demand: usize,
    pub from: usize,
    pub to: usize,
    pub payment: f64,
    pub ell: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CombinerTrace {
    pub steps: Vec<FollowStep>,
    pub switches: Vec<SwitchEvent>,
    /// `ell` increments that kept following the same algorithm.
    pub stays: u32,
    pub final_ell: u32,
}

/// Outcome of one online execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub seed: u64,
    pub total: f64,
    pub fcost: f64,
    pub acost: f64,
    pub n_opened: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<DecisionRecord>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub combiner: Option<CombinerTrace>,
}

impl RunResult {
    fn from_state(algorithm: String, seed: u64, state: OnlineState) -> Self {
        RunResult {
            algorithm,
            seed,
            total: state.fcost + state.acost,
            fcost: state.fcost,
            acost: state.acost,
            n_opened: state.open.len(),
            trace: Some(state.trace),
            combiner: None,
        }
    }

    pub fn decisions(&self) -> &[DecisionRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Copy without the per-demand trace, for compact reporting.
    pub fn summary(&self) -> RunResult {
        RunResult { trace: None, combiner: None, ..self.clone() }
    }

    pub fn to_json(&self, with_trace: bool) -> serde_json::Result<String> {
        if with_trace {
            serde_json::to_string(self)
        } else {
            serde_json::to_string(&self.summary())
        }
    }
}

/// Runs `algorithm` over the whole demand sequence with a stream seeded by `seed`.
pub fn run(
    algorithm: Algorithm,
    instance: &Instance,
    predictions: Option<&PredictionSequence>,
    seed: u64,
) -> Result<RunResult> {
    OnlineRunner::new(algorithm, instance, predictions, seed)?.finish(seed)
}

pub fn competitive_ratio(result: &RunResult, offline: &OfflineSolution) -> Result<f64> {
    ratio(result.total, offline.total)
}

pub(crate) fn ratio(total: f64, opt: f64) -> Result<f64> {
    if opt <= 0.0 {
        return Err(Error::ZeroOfflineCost);
    }
    Ok(total / opt)
}
