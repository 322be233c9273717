use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use predfl::{generate_lower_bound_instance, min_combine, run, Algorithm, OfflineSolution, ReplayInstance};
use predfl_bench::config::parse_key_values;
use predfl_bench::experiment::{load_points, prepare_batch};
use predfl_bench::{
    run_experiment_with, write_json, AlgorithmChoice, Aggregation, CsvSink, ExperimentConfig, OutputFormat, ResultRow,
};

#[derive(Parser)]
#[command(name = "predfl", version, about = "Online facility location with predictions: experiments and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write result rows.
    Run(RunArgs),
    /// Solve one batch offline and print the solution as JSON.
    SolveOffline(SolveArgs),
    /// Export a lower-bound tree instance with adversarial predictions.
    GenLb(GenLbArgs),
    /// Run an algorithm on an exported instance.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Point file or `uniform:N[:EXTENT]`.
    #[arg(long)]
    dataset: Option<String>,
    /// `all`, `drop-last:K` or a comma list of column indices.
    #[arg(long)]
    columns: Option<String>,
    #[arg(long)]
    limit: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    /// A number, `auto` or `diameter/K`.
    #[arg(long)]
    facility_cost: Option<String>,
    /// Comma list of meyerson, predfl, min.
    #[arg(long)]
    algorithms: Option<String>,
    /// Comma list of predictor kinds.
    #[arg(long)]
    predictor: Option<String>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    stds: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Ratio shown in the summary: max, mean or both.
    #[arg(long)]
    agg: Option<String>,
    #[arg(long)]
    max_exact: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Record wall time per row.
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut map = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("dataset", &self.dataset),
            ("columns", &self.columns),
            ("limit", &self.limit),
            ("batch-size", &self.batch_size),
            ("facility-cost", &self.facility_cost),
            ("algorithms", &self.algorithms),
            ("predictor", &self.predictor),
            ("alphas", &self.alphas),
            ("stds", &self.stds),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("agg", &self.agg),
            ("max-exact", &self.max_exact),
            ("epsilon", &self.epsilon),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.insert(key.to_owned(), v.clone());
            }
        }
        if self.timing {
            map.insert("timing".into(), "true".into());
        }
        Ok(ExperimentConfig::from_map(&map)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long)]
    columns: Option<String>,
    #[arg(long)]
    limit: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    /// Zero-based batch to solve.
    #[arg(long, default_value_t = 0)]
    batch: usize,
    #[arg(long)]
    facility_cost: Option<String>,
    #[arg(long)]
    max_exact: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenLbArgs {
    /// Tree branching parameter.
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Must make `m * alpha` a positive integer.
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// JSON written by `gen-lb`.
    #[arg(long)]
    instance: PathBuf,
    /// meyerson, predfl or min.
    #[arg(long, default_value = "predfl")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the per-demand decision trace.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_value<T: Serialize>(value: &T, path: Option<&PathBuf>) -> anyhow::Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn summary_line(row: &ResultRow, agg: Aggregation) -> String {
    let head = format!(
        "batch {} {:<9} {} alpha={} std={}",
        row.batch_id, row.algorithm, row.predictor, row.alpha, row.std
    );
    if let Some(e) = &row.error {
        return format!("{head} error: {e}");
    }
    match agg {
        Aggregation::Max => format!("{head} ratio_max={:.4}", row.ratio_max),
        Aggregation::Mean => format!("{head} ratio_mean={:.4}", row.ratio_mean),
        Aggregation::Both => format!("{head} ratio_max={:.4} ratio_mean={:.4}", row.ratio_max, row.ratio_mean),
    }
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let config = args.config()?;
    let mut out = output(config.out.as_ref())?;
    let mut failed = 0usize;
    let mut report = |row: &ResultRow| {
        failed += usize::from(row.error.is_some());
        eprintln!("{}", summary_line(row, config.agg));
    };
    match config.format {
        OutputFormat::Csv => {
            let mut sink = CsvSink::new(&mut out)?;
            run_experiment_with(&config, |row| {
                report(&row);
                sink.push(&row)
            })?;
            sink.finish()?;
        }
        OutputFormat::Json => {
            let mut rows = Vec::new();
            run_experiment_with(&config, |row| {
                report(&row);
                rows.push(row);
                Ok(())
            })?;
            write_json(&rows, &mut out)?;
        }
    }
    out.flush()?;
    if failed > 0 {
        eprintln!("{failed} row(s) carry errors");
    }
    Ok(())
}

#[derive(Serialize)]
struct SolvedBatch {
    dataset: String,
    batch_id: usize,
    n_points: usize,
    facility_cost: f64,
    solution: OfflineSolution,
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let mut map = BTreeMap::from([("dataset".to_owned(), args.dataset.clone())]);
    for (key, value) in [
        ("columns", &args.columns),
        ("limit", &args.limit),
        ("batch-size", &args.batch_size),
        ("facility-cost", &args.facility_cost),
        ("max-exact", &args.max_exact),
        ("seed", &args.seed),
    ] {
        if let Some(v) = value {
            map.insert(key.to_owned(), v.clone());
        }
    }
    let config = ExperimentConfig::from_map(&map)?;
    let points = load_points(&config)?;
    let Some(chunk) = points.chunks(config.batch_size).nth(args.batch) else {
        bail!("batch {} does not exist ({} points, batch size {})", args.batch, points.len(), config.batch_size);
    };
    let batch = prepare_batch(args.batch, chunk.to_vec(), &config)?;
    let solved = SolvedBatch {
        dataset: config.dataset.label(),
        batch_id: batch.id,
        n_points: batch.instance.len(),
        facility_cost: batch.instance.facility_cost,
        solution: batch.offline,
    };
    eprintln!(
        "batch {}: {} centers, total {} ({})",
        solved.batch_id,
        solved.solution.centers.len(),
        solved.solution.total,
        solved.solution.exactness
    );
    write_value(&solved, args.out.as_ref())
}

fn cmd_gen_lb(args: &GenLbArgs) -> anyhow::Result<()> {
    let hst = generate_lower_bound_instance(args.m, args.alpha, args.seed)?;
    let single = hst.single_center_solution()?;
    eprintln!(
        "levels {} demands {} facility cost {} single-center cost {} bound {}",
        hst.params.levels,
        hst.instance.len(),
        hst.instance.facility_cost,
        single.total,
        hst.params.opt_bound()
    );
    write_value(&hst.to_replay(), args.out.as_ref())
}

fn cmd_replay(args: &ReplayArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.instance).with_context(|| format!("reading {}", args.instance.display()))?;
    let replay: ReplayInstance = serde_json::from_str(&text)?;
    let (instance, predictions) = replay.into_parts()?;
    let choice: AlgorithmChoice = args.algorithm.parse()?;
    let result = match choice {
        AlgorithmChoice::Single(alg) => run(alg, &instance, predictions.as_ref().filter(|_| alg.needs_predictions()), args.seed)?,
        AlgorithmChoice::Min => {
            min_combine(&instance, predictions.as_ref(), Algorithm::PredFl, Algorithm::Meyerson, args.seed)?
        }
    };
    let result = if args.trace { result } else { result.summary() };
    eprintln!(
        "{}: total {} (facility {}, assignment {}), {} opened",
        result.algorithm, result.total, result.fcost, result.acost, result.n_opened
    );
    write_value(&result, args.out.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SolveOffline(a) => cmd_solve(a),
        Command::GenLb(a) => cmd_gen_lb(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
