//! The experiment sweep: batch, solve offline, generate predictions, run
//! every algorithm for every trial and aggregate competitive ratios.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use predfl::seed::derive_seed;
use predfl::{
    compute_errors, generate_predictions, min_combine, run, solve_exact, solve_local_search, Algorithm, Exactness,
    Instance, Location, MetricSpace, OfflineSolution, PredictionSequence, PredictorKind, PredictorSpec,
};

use crate::config::{AlgorithmChoice, DatasetSource, ExperimentConfig, FacilityCostPolicy};
use crate::error::{BenchError, Result};
use crate::ingest::ingest_points;
use crate::synth::synth_uniform;

const DATASET_STREAM: u64 = 0x6461_7461;
const OFFLINE_STREAM: u64 = 0x6f66_666c;
const PREDICTION_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub batch_id: usize,
    pub algorithm: String,
    pub predictor: String,
    pub alpha: f64,
    pub std: f64,
    pub trials: usize,
    pub facility_cost: f64,
    pub n_points: usize,
    pub ratio_max: f64,
    pub ratio_mean: f64,
    pub eta1: f64,
    pub eta_inf: f64,
    pub err1: f64,
    pub err_inf: f64,
    pub opt_total: f64,
    pub opt_exactness: Exactness,
    pub wall_time: f64,
    pub error: Option<String>,
}

impl ResultRow {
    pub const HEADER: [&'static str; 19] = [
        "dataset",
        "batch_id",
        "algorithm",
        "predictor",
        "alpha",
        "std",
        "trials",
        "facility_cost",
        "n_points",
        "ratio_max",
        "ratio_mean",
        "eta1",
        "eta_inf",
        "err1",
        "err_inf",
        "opt_total",
        "opt_exactness",
        "wall_time",
        "error",
    ];
}

/// One (predictor, alpha, std) combination of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub kind: PredictorKind,
    pub alpha: f64,
    pub std: f64,
}

impl Cell {
    fn tags(&self, batch_id: usize) -> [u64; 4] {
        [batch_id as u64, self.kind.tag(), self.alpha.to_bits(), self.std.to_bits()]
    }

    /// Seed shared by every algorithm for trial `trial` of this cell.
    pub fn trial_seed(&self, master: u64, batch_id: usize, trial: usize) -> u64 {
        let [b, k, a, s] = self.tags(batch_id);
        derive_seed(master, &[b, k, a, s, trial as u64])
    }

    pub fn prediction_seed(&self, master: u64, batch_id: usize) -> u64 {
        let [b, k, a, s] = self.tags(batch_id);
        derive_seed(master, &[b, k, a, s, PREDICTION_STREAM])
    }
}

/// Sweep cells in config order. Non-Gaussian kinds ignore the std list.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &kind in &config.predictors {
        let gaussian = matches!(
            kind,
            PredictorKind::AlphaGaussian | PredictorKind::PerturbGaussian | PredictorKind::RandomPerturb
        );
        let stds: &[f64] = if gaussian { &config.stds } else { &[0.0] };
        for &alpha in &config.alphas {
            for &std in stds {
                out.push(Cell { kind, alpha, std });
            }
        }
    }
    out
}

pub fn load_points(config: &ExperimentConfig) -> Result<Vec<Location>> {
    let points = match &config.dataset {
        DatasetSource::File { path, columns } => ingest_points(path, config.limit, columns)?,
        DatasetSource::Uniform { n, extent } => {
            let n = config.limit.map_or(*n, |l| l.min(*n));
            synth_uniform(n, *extent, derive_seed(config.seed, &[DATASET_STREAM]))
        }
    };
    if points.is_empty() {
        return Err(BenchError::Ingest("dataset has no points".into()));
    }
    Ok(points)
}

fn diameter(space: &MetricSpace, points: &[Location]) -> Result<f64> {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(space.distance(a, b)?);
        }
    }
    Ok(best)
}

/// A batch with its offline baseline.
#[derive(Clone, Debug)]
pub struct Batch {
    pub id: usize,
    pub instance: Instance,
    pub offline: OfflineSolution,
}

pub fn prepare_batch(id: usize, points: Vec<Location>, config: &ExperimentConfig) -> Result<Batch> {
    let dim = points.first().and_then(Location::coords).map_or(0, <[f64]>::len);
    let space = MetricSpace::euclidean(dim);
    let f = match config.facility_cost {
        FacilityCostPolicy::Fixed(f) => f,
        FacilityCostPolicy::DiameterFraction(k) => {
            let d = diameter(&space, &points)?;
            if d <= 0.0 {
                return Err(BenchError::Config(format!("batch {id} has zero diameter; set an explicit facility cost")));
            }
            d / k
        }
    };
    let instance = Instance::new(space, points, f)?;
    let offline = if instance.len() <= config.max_exact {
        solve_exact(&instance, config.max_exact)?
    } else {
        solve_local_search(&instance, config.epsilon, derive_seed(config.seed, &[id as u64, OFFLINE_STREAM]))?
    };
    Ok(Batch { id, instance, offline })
}

fn run_choice(
    choice: AlgorithmChoice,
    instance: &Instance,
    predictions: &PredictionSequence,
    seed: u64,
) -> predfl::Result<f64> {
    Ok(match choice {
        AlgorithmChoice::Single(alg) => run(alg, instance, alg.needs_predictions().then_some(predictions), seed)?.total,
        AlgorithmChoice::Min => {
            min_combine(instance, Some(predictions), Algorithm::PredFl, Algorithm::Meyerson, seed)?.total
        }
    })
}

struct RowBase<'a> {
    dataset: &'a str,
    batch_id: usize,
    n_points: usize,
    facility_cost: f64,
    opt_total: f64,
    opt_exactness: Exactness,
    trials: usize,
}

impl RowBase<'_> {
    fn row(&self, algorithm: AlgorithmChoice, cell: &Cell) -> ResultRow {
        ResultRow {
            dataset: self.dataset.to_owned(),
            batch_id: self.batch_id,
            algorithm: algorithm.to_string(),
            predictor: cell.kind.to_string(),
            alpha: cell.alpha,
            std: cell.std,
            trials: self.trials,
            facility_cost: self.facility_cost,
            n_points: self.n_points,
            ratio_max: 0.0,
            ratio_mean: 0.0,
            eta1: 0.0,
            eta_inf: 0.0,
            err1: 0.0,
            err_inf: 0.0,
            opt_total: self.opt_total,
            opt_exactness: self.opt_exactness,
            wall_time: 0.0,
            error: None,
        }
    }
}

fn cell_rows(batch: &Batch, cell: &Cell, config: &ExperimentConfig, dataset: &str) -> Vec<ResultRow> {
    let base = RowBase {
        dataset,
        batch_id: batch.id,
        n_points: batch.instance.len(),
        facility_cost: batch.instance.facility_cost,
        opt_total: batch.offline.total,
        opt_exactness: batch.offline.exactness,
        trials: config.trials,
    };
    let errored = |msg: String| -> Vec<ResultRow> {
        config
            .algorithms
            .iter()
            .map(|&a| ResultRow { error: Some(msg.clone()), ..base.row(a, cell) })
            .collect()
    };
    let prepared = PredictorSpec::new(cell.kind, cell.alpha, cell.std).and_then(|spec| {
        let preds = generate_predictions(&batch.instance, &batch.offline, &spec, cell.prediction_seed(config.seed, batch.id))?;
        let profile = compute_errors(&batch.instance, &batch.offline, &preds)?;
        Ok((preds, profile))
    });
    let (preds, profile) = match prepared {
        Ok(p) => p,
        Err(e) => return errored(e.to_string()),
    };

    let mut rows = Vec::with_capacity(config.algorithms.len());
    for &choice in &config.algorithms {
        let mut row = ResultRow {
            eta1: profile.eta1,
            eta_inf: profile.eta_inf,
            err1: profile.err1,
            err_inf: profile.err_inf,
            ..base.row(choice, cell)
        };
        let start = Instant::now();
        let ratios: predfl::Result<Vec<f64>> = (0..config.trials)
            .map(|t| {
                let total = run_choice(choice, &batch.instance, &preds, cell.trial_seed(config.seed, batch.id, t))?;
                Ok(total / batch.offline.total)
            })
            .collect();
        match ratios {
            Ok(r) => {
                row.ratio_max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                row.ratio_mean = r.iter().sum::<f64>() / r.len() as f64;
                // the mean can exceed the max by an ulp when all trials agree
                row.ratio_mean = row.ratio_mean.min(row.ratio_max);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        if config.timing {
            row.wall_time = start.elapsed().as_secs_f64();
        }
        rows.push(row);
    }
    rows
}

/// Runs the sweep, handing rows to `sink` batch by batch in config order.
/// Failures inside a batch or cell become rows carrying an `error`; only
/// configuration and dataset loading failures abort.
pub fn run_experiment_with<F>(config: &ExperimentConfig, mut sink: F) -> Result<usize>
where
    F: FnMut(ResultRow) -> Result<()>,
{
    config.validate()?;
    let points = load_points(config)?;
    let dataset = config.dataset.label();
    let cells = cells(config);
    let chunks: Vec<Vec<Location>> = points.chunks(config.batch_size).map(<[Location]>::to_vec).collect();

    let batches: Vec<(usize, usize, Result<Batch>)> = chunks
        .into_par_iter()
        .enumerate()
        .map(|(id, pts)| {
            let n = pts.len();
            (id, n, prepare_batch(id, pts, config))
        })
        .collect();

    let mut emitted = 0;
    for (id, n, batch) in batches {
        let rows: Vec<ResultRow> = match &batch {
            Ok(b) => cells.par_iter().flat_map_iter(|c| cell_rows(b, c, config, &dataset)).collect(),
            Err(e) => {
                let base = RowBase {
                    dataset: &dataset,
                    batch_id: id,
                    n_points: n,
                    facility_cost: 0.0,
                    opt_total: 0.0,
                    opt_exactness: Exactness::Declared,
                    trials: config.trials,
                };
                cells
                    .iter()
                    .flat_map(|c| {
                        config.algorithms.iter().map(|&a| ResultRow { error: Some(e.to_string()), ..base.row(a, c) })
                    })
                    .collect()
            }
        };
        for row in rows {
            sink(row)?;
            emitted += 1;
        }
    }
    Ok(emitted)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    run_experiment_with(config, |r| {
        rows.push(r);
        Ok(())
    })?;
    Ok(rows)
}
