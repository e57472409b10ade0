use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gbfsvm::data::{inject_label_noise, normalize_minmax, split_indices, LabelColumn, NoiseSpec};
use gbfsvm::experiment::{
    render_report, run_experiment, train_model, BallMembership, DatasetSource, ExperimentConfig, ReportFormat,
    DEFAULT_C, DEFAULT_LAMBDA, DEFAULT_NOISE_LEVELS, DEFAULT_RUNS, DEFAULT_TEST_FRACTION,
};
use gbfsvm::granular_ball::{attach_membership_from_samples, generate_balls, BallGenConfig, RadiusMode};
use gbfsvm::membership::{fit_class_geometry, DEFAULT_EPSILON};
use gbfsvm::pso::{
    PsoConfig, DEFAULT_EQUALITY_TOLERANCE, DEFAULT_INERTIA, DEFAULT_LEARNING_FACTOR, DEFAULT_MAX_ITER,
};
use gbfsvm::svm::ModelKind;

#[derive(Parser)]
#[command(name = "gbfsvm", version, about = "Granular-ball fuzzy SVM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate granular balls for a dataset and print them.
    Balls(BallsArgs),
    /// Fit one model and print it as JSON.
    Train(TrainArgs),
    /// Run the label-noise benchmark.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV path, or `synthetic-tfn[:n]`.
    #[arg(long)]
    dataset: String,
    /// Label column index or header name; defaults to the last column.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Args, Clone)]
struct BallArgs {
    /// Purity threshold in (0.5, 1].
    #[arg(long, default_value_t = 0.9)]
    purity: f64,
    #[arg(long, default_value = "mean")]
    radius_mode: RadiusMode,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Ball membership: `center` (membership function at the center) or
    /// `samples` (member mean).
    #[arg(long, default_value = "center")]
    ball_membership: BallMembership,
}

#[derive(Args, Clone)]
struct PsoArgs {
    #[arg(long)]
    pso_pop: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pso_iters: usize,
    #[arg(long, default_value_t = DEFAULT_INERTIA)]
    pso_inertia: f64,
    #[arg(long, default_value_t = DEFAULT_LEARNING_FACTOR)]
    pso_c1: f64,
    #[arg(long, default_value_t = DEFAULT_LEARNING_FACTOR)]
    pso_c2: f64,
    /// Equality penalty weight; defaults to 1000 * C.
    #[arg(long)]
    pso_penalty: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EQUALITY_TOLERANCE)]
    pso_tolerance: f64,
}

impl PsoArgs {
    fn config(&self, seed: u64) -> PsoConfig<f64> {
        PsoConfig {
            pop: self.pso_pop,
            max_iter: self.pso_iters,
            inertia: self.pso_inertia,
            c1: self.pso_c1,
            c2: self.pso_c2,
            penalty_coefficient: self.pso_penalty,
            equality_tolerance: self.pso_tolerance,
            seed,
            ..PsoConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BallFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct BallsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    ball: BallArgs,
    /// Label-noise fraction applied before generation.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: BallFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "gbfsvm")]
    model: ModelKind,
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    c: f64,
    #[command(flatten)]
    ball: BallArgs,
    /// Confidence level for `gbfsvm-tfn`.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    pso: PsoArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset CSV paths or `synthetic-tfn[:n]`; repeatable.
    #[arg(long, required = true)]
    dataset: Vec<String>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long = "model", value_delimiter = ',', default_value = "svm,fsvm,gbsvm,gbfsvm")]
    models: Vec<ModelKind>,
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    c: f64,
    /// Fixed purity threshold; by default one is selected per dataset.
    #[arg(long)]
    purity: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    purity_grid: Option<Vec<f64>>,
    #[arg(long, default_value = "mean")]
    radius_mode: RadiusMode,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value = "center")]
    ball_membership: BallMembership,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    pso: PsoArgs,
    /// Run datasets concurrently (no runtime table).
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn label_column(s: &Option<String>) -> Result<LabelColumn> {
    Ok(match s {
        Some(v) => v.parse()?,
        None => LabelColumn::default(),
    })
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn balls(a: BallsArgs) -> Result<()> {
    let src = DatasetSource::parse(&a.data.dataset, &label_column(&a.data.label_column)?, a.seed)?;
    let d = normalize_minmax(&src.load()?);
    let d = inject_label_noise(&d, &NoiseSpec::new(a.noise, a.seed)?);
    let g = fit_class_geometry(&d, a.ball.epsilon)?;
    let d = d.clone().with_memberships(g.memberships_for(&d))?;
    let cfg = BallGenConfig {
        radius_mode: a.ball.radius_mode,
        kmeans_seed: a.seed,
        ..BallGenConfig::with_threshold(a.ball.purity)
    };
    let fbs = generate_balls(&d, &cfg)?;
    let fbs = match a.ball.ball_membership {
        BallMembership::Samples => attach_membership_from_samples(&fbs, &d)?,
        BallMembership::Center => gbfsvm::granular_ball::attach_membership_from_function(&fbs, |x, y| g.membership(x, y))?,
    };
    let text = match a.format {
        BallFormat::Json => fbs.to_json()?,
        BallFormat::Csv => fbs.to_csv()?,
    };
    emit(&text, &a.output)
}

fn train(a: TrainArgs) -> Result<()> {
    let src = DatasetSource::parse(&a.data.dataset, &label_column(&a.data.label_column)?, a.seed)?;
    let cfg = ExperimentConfig {
        datasets: vec![src.clone()],
        models: vec![a.model],
        c: a.c,
        purity_threshold: Some(a.ball.purity),
        lambda: a.lambda,
        runs_per_cell: a.runs,
        seed: a.seed,
        test_fraction: a.test_fraction,
        radius_mode: a.ball.radius_mode,
        epsilon: a.ball.epsilon,
        ball_membership: a.ball.ball_membership,
        pso: a.pso.config(a.seed),
        noise_levels: vec![a.noise],
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let d = normalize_minmax(&src.load()?);
    let (tr, te) = split_indices(&d, a.test_fraction, a.seed)?;
    let train = inject_label_noise(&d.subset(&tr), &NoiseSpec::new(a.noise, a.seed)?);
    let test = d.subset(&te);
    let fitted = train_model(&cfg, a.model, &train, a.ball.purity)?;
    let out = json!({
        "dataset": src.name(),
        "model": a.model,
        "noise": a.noise,
        "purity_threshold": fitted.purity_threshold,
        "ball_count": fitted.ball_count,
        "train_accuracy": fitted.solution.accuracy(&train),
        "test_accuracy": fitted.solution.accuracy(&test),
        "solution": fitted.solution,
    });
    emit(&serde_json::to_string_pretty(&out)?, &a.output)
}

fn bench(a: BenchArgs) -> Result<()> {
    let lc = label_column(&a.label_column)?;
    let datasets = a
        .dataset
        .iter()
        .map(|s| DatasetSource::parse(s, &lc, a.seed))
        .collect::<gbfsvm::Result<Vec<_>>>()?;
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        datasets,
        noise_levels: a.noise.unwrap_or_else(|| DEFAULT_NOISE_LEVELS.to_vec()),
        models: a.models,
        c: a.c,
        purity_threshold: a.purity,
        purity_grid: a.purity_grid.unwrap_or(defaults.purity_grid),
        lambda: a.lambda,
        runs_per_cell: a.runs,
        seed: a.seed,
        test_fraction: a.test_fraction,
        radius_mode: a.radius_mode,
        epsilon: a.epsilon,
        ball_membership: a.ball_membership,
        pso: a.pso.config(a.seed),
        parallel: a.parallel,
    };
    let report = run_experiment(&cfg)?;
    emit(&render_report(&report, a.format)?, &a.output)
}

fn error_record(e: &anyhow::Error) -> serde_json::Value {
    let kind = e
        .chain()
        .find_map(|c| c.downcast_ref::<gbfsvm::Error>())
        .map(gbfsvm::Error::kind)
        .unwrap_or("cli");
    json!({ "error": { "kind": kind, "message": format!("{e:#}") } })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Balls(a) => balls(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::FAILURE
        }
    }
}
