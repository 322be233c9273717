//! Experiment harness for online facility location with predictions.

pub mod config;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod stats;
pub mod synth;

pub use config::{AlgorithmChoice, Aggregation, DatasetSource, ExperimentConfig, FacilityCostPolicy, OutputFormat};
pub use emit::{emit, read_csv, read_json, write_csv, write_json, CsvSink};
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, run_experiment_with, ResultRow};
pub use ingest::{ingest_points, ColumnMask};
pub use stats::spearman;
pub use synth::synth_uniform;
