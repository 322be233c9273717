//! Online facility location with location predictions.
//!
//! Metric spaces, offline baselines, prediction generators, the online
//! algorithms, a two-algorithm combiner and lower-bound instances.

pub mod adversary;
pub mod combiner;
pub mod error;
pub mod metric;
pub mod offline;
pub mod online;
pub mod predictors;
pub mod seed;

pub use adversary::{
    generate_lower_bound_instance, measure_adversarial_ratio, AdversarialSummary, HstInstance, HstParams,
    ReplayInstance,
};
pub use combiner::{min_combine, min_combine_detailed, CombinedRun};
pub use error::{Error, LocationError, Result};
pub use metric::{nearest, DistanceMatrix, Location, MetricSpace, TriangleCheck, WeightedTree};
pub use offline::{
    solve_exact, solve_local_search, Exactness, Instance, OfflineSolution, DEFAULT_EPSILON, DEFAULT_MAX_EXACT,
};
pub use online::{competitive_ratio, run, Algorithm, DecisionRecord, OnlineRunner, RunResult};
pub use predictors::{compute_errors, generate_predictions, ErrorProfile, PredictionSequence, PredictorKind, PredictorSpec};
pub use seed::derive_seed;

/// The prediction stream an algorithm consumes, if any.
pub(crate) fn predictions_for(alg: Algorithm, predictions: Option<&PredictionSequence>) -> Option<&PredictionSequence> {
    if alg.needs_predictions() {
        predictions
    } else {
        None
    }
}
