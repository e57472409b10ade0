//! Label-noise benchmark: noise sweeps over datasets and models with
//! per-dataset purity selection, accuracy and runtime tables.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{inject_label_noise, load_csv, normalize_minmax, split_indices, Dataset, Label, LabelColumn, NoiseSpec};
use crate::error::{Error, Result};
use crate::granular_ball::{
    attach_membership_from_function, attach_membership_from_samples, generate_balls, BallGenConfig, FuzzyBallSet,
    RadiusMode,
};
use crate::membership::{fit_class_geometry, DEFAULT_EPSILON};
use crate::pso::PsoConfig;
use crate::svm::{self, BallTrainingSet, ModelConfig, ModelKind, Variant};
use crate::tfn::{self, ConfidenceLevel, TfnBallTrainingSet};

pub const DEFAULT_NOISE_LEVELS: [f64; 7] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
pub const DEFAULT_PURITY_GRID: [f64; 4] = [0.70, 0.80, 0.90, 0.95];
pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_RUNS: usize = 4;
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;
pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const SYNTHETIC_TFN: &str = "synthetic-tfn";
pub const DEFAULT_SYNTHETIC_SIZE: usize = 300;

/// Where a benchmark dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv { path: PathBuf, label_column: LabelColumn },
    /// Two Gaussian blobs whose ball memberships are fuzzified for the
    /// triangular-label model.
    SyntheticTfn { n: usize, seed: u64 },
}

impl DatasetSource {
    /// `synthetic-tfn[:n]` or a CSV path.
    pub fn parse(s: &str, label_column: &LabelColumn, seed: u64) -> Result<Self> {
        if let Some(rest) = s.strip_prefix(SYNTHETIC_TFN) {
            let n = match rest.strip_prefix(':') {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad synthetic size in {s:?}")))?,
                None if rest.is_empty() => DEFAULT_SYNTHETIC_SIZE,
                None => return Err(Error::InvalidParameter(format!("unknown dataset {s:?}"))),
            };
            return Ok(DatasetSource::SyntheticTfn { n, seed });
        }
        Ok(DatasetSource::Csv {
            path: PathBuf::from(s),
            label_column: label_column.clone(),
        })
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            DatasetSource::SyntheticTfn { .. } => SYNTHETIC_TFN.to_string(),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, DatasetSource::SyntheticTfn { .. })
    }

    pub fn load(&self) -> Result<Dataset<f64>> {
        match self {
            DatasetSource::Csv { path, label_column } => load_csv(path, label_column),
            DatasetSource::SyntheticTfn { n, seed } => synthetic_tfn_dataset(*n, *seed),
        }
    }
}

/// Two overlapping isotropic Gaussian classes in the unit square, alternating
/// labels starting with `+1`.
pub fn synthetic_tfn_dataset(n: usize, seed: u64) -> Result<Dataset<f64>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("synthetic size {n} must be >= 4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (label, center) = if i % 2 == 0 { (Label::Pos, 0.65) } else { (Label::Neg, 0.35) };
        rows.push(vec![center + 0.12 * gauss(), center + 0.12 * gauss()]);
        labels.push(label);
    }
    Dataset::new(SYNTHETIC_TFN, rows, labels, None)
}

/// How ball memberships are derived from sample memberships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMembership {
    /// Mean of member memberships.
    Samples,
    /// Membership function evaluated at the ball center.
    #[default]
    Center,
}

impl std::str::FromStr for BallMembership {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "samples" | "mean" => Ok(BallMembership::Samples),
            "center" | "function" => Ok(BallMembership::Center),
            _ => Err(Error::InvalidParameter(format!("unknown ball membership {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub noise_levels: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub c: f64,
    /// Fixed threshold; `None` selects one per dataset from `purity_grid`.
    pub purity_threshold: Option<f64>,
    pub purity_grid: Vec<f64>,
    pub lambda: f64,
    pub runs_per_cell: usize,
    /// Split, noise and k-means seed. Swarm seeds come from `pso.seed`.
    pub seed: u64,
    pub test_fraction: f64,
    pub radius_mode: RadiusMode,
    pub epsilon: f64,
    pub ball_membership: BallMembership,
    pub pso: PsoConfig<f64>,
    /// Process datasets on separate threads; disables the runtime table.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            noise_levels: DEFAULT_NOISE_LEVELS.to_vec(),
            models: vec![ModelKind::Svm, ModelKind::Fsvm, ModelKind::Gbsvm, ModelKind::Gbfsvm],
            c: DEFAULT_C,
            purity_threshold: None,
            purity_grid: DEFAULT_PURITY_GRID.to_vec(),
            lambda: DEFAULT_LAMBDA,
            runs_per_cell: DEFAULT_RUNS,
            seed: 0,
            test_fraction: DEFAULT_TEST_FRACTION,
            radius_mode: RadiusMode::default(),
            epsilon: DEFAULT_EPSILON,
            ball_membership: BallMembership::default(),
            pso: PsoConfig::default(),
            parallel: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::InvalidParameter("no datasets configured".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidParameter("no models configured".into()));
        }
        if self.noise_levels.is_empty() {
            return Err(Error::InvalidParameter("no noise levels configured".into()));
        }
        if let Some(&f) = self.noise_levels.iter().find(|f| !(0.0..=0.5).contains(*f)) {
            return Err(Error::InvalidParameter(format!("noise level {f} outside [0, 0.5]")));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("C = {} must be positive", self.c)));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::InvalidParameter("runs per cell must be >= 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        for &t in self.purity_threshold.iter().chain(&self.purity_grid) {
            BallGenConfig::<f64>::with_threshold(t).validate()?;
        }
        if self.purity_threshold.is_none() && self.purity_grid.is_empty() {
            return Err(Error::InvalidParameter("empty purity grid".into()));
        }
        ConfidenceLevel::new(self.lambda)?;
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    fn ball_config(&self, threshold: f64) -> BallGenConfig<f64> {
        BallGenConfig {
            radius_mode: self.radius_mode,
            kmeans_seed: self.seed,
            ..BallGenConfig::with_threshold(threshold)
        }
    }
}

/// Deterministic per-purpose seed.
fn derive_seed(base: u64, tag: u64) -> u64 {
    base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

const TAG_VALIDATION: u64 = 1;
const TAG_NOISE: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub objective: Option<f64>,
    pub feasibility_gap: Option<f64>,
    pub feasible: bool,
    pub degenerate: bool,
    /// Preparation (membership, balls) plus training.
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// Models were recovered but no run met the equality tolerance.
    Infeasible,
    Failed,
    Skipped,
}

impl CellStatus {
    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Infeasible => "infeasible",
            CellStatus::Failed => "failed",
            CellStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    pub noise: f64,
    pub model: ModelKind,
    pub status: CellStatus,
    pub message: Option<String>,
    /// Max test accuracy over feasible runs (over all runs when none is).
    pub best_accuracy: Option<f64>,
    pub mean_accuracy: Option<f64>,
    /// Test accuracy of the run chosen by the best-of-runs rule.
    pub selected_accuracy: Option<f64>,
    pub selected_run: Option<usize>,
    /// Mean seconds per run.
    pub seconds: Option<f64>,
    pub ball_count: Option<usize>,
    pub purity_threshold: Option<f64>,
    pub split_seed: u64,
    pub noise_seed: u64,
    pub runs: Vec<RunRecord>,
}

impl CellReport {
    fn empty(dataset: &str, noise: f64, model: ModelKind, split_seed: u64, noise_seed: u64) -> Self {
        Self {
            dataset: dataset.to_string(),
            noise,
            model,
            status: CellStatus::Failed,
            message: None,
            best_accuracy: None,
            mean_accuracy: None,
            selected_accuracy: None,
            selected_run: None,
            seconds: None,
            ball_count: None,
            purity_threshold: None,
            split_seed,
            noise_seed,
            runs: Vec::new(),
        }
    }

    fn with_status(mut self, status: CellStatus, message: impl Into<String>) -> Self {
        self.status = status;
        self.message = Some(message.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityTrial {
    pub threshold: f64,
    pub accuracy: Option<f64>,
    pub ball_count: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuritySelection {
    pub dataset: String,
    /// Empty when the threshold was fixed by configuration.
    pub trials: Vec<PurityTrial>,
    pub chosen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub datasets: Vec<String>,
    pub noise_levels: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub cells: Vec<CellReport>,
    pub purity: Vec<PuritySelection>,
    pub parallel: bool,
}

impl ExperimentReport {
    pub fn cell(&self, dataset: &str, noise: f64, model: ModelKind) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.noise == noise && c.model == model)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Runs every (dataset, noise, model) cell. Failures are recorded per cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let names: Vec<String> = cfg.datasets.iter().map(DatasetSource::name).collect();
    let outcomes: Vec<(Vec<CellReport>, Option<PuritySelection>)> = if cfg.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .datasets
                .iter()
                .zip(&names)
                .map(|(src, name)| scope.spawn(move || run_dataset(cfg, src, name)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("dataset worker panicked"))
                .collect()
        })
    } else {
        cfg.datasets
            .iter()
            .zip(&names)
            .map(|(src, name)| run_dataset(cfg, src, name))
            .collect()
    };
    let mut cells = Vec::new();
    let mut purity = Vec::new();
    for (c, p) in outcomes {
        cells.extend(c);
        purity.extend(p);
    }
    Ok(ExperimentReport {
        datasets: names,
        noise_levels: cfg.noise_levels.clone(),
        models: cfg.models.clone(),
        cells,
        purity,
        parallel: cfg.parallel,
    })
}

fn run_dataset(cfg: &ExperimentConfig, src: &DatasetSource, name: &str) -> (Vec<CellReport>, Option<PuritySelection>) {
    let split_seed = cfg.seed;
    let noise_seed = |j: usize| derive_seed(cfg.seed, TAG_NOISE + j as u64);
    let fail_all = |msg: String| -> Vec<CellReport> {
        let mut out = Vec::new();
        for (j, &noise) in cfg.noise_levels.iter().enumerate() {
            for &model in &cfg.models {
                out.push(CellReport::empty(name, noise, model, split_seed, noise_seed(j)).with_status(CellStatus::Failed, msg.clone()));
            }
        }
        out
    };

    let prepared = src
        .load()
        .map(|d| normalize_minmax(&d))
        .and_then(|d| split_indices(&d, cfg.test_fraction, split_seed).map(|(tr, te)| (d.subset(&tr), d.subset(&te))));
    let (train, test) = match prepared {
        Ok(v) => v,
        Err(e) => {
            warn!("dataset {name}: {e}");
            return (fail_all(format!("dataset: {e}")), None);
        }
    };

    let needs_balls = cfg.models.iter().any(|m| m.uses_balls());
    let selection = needs_balls.then(|| select_purity(cfg, name, &train));
    let threshold = selection.as_ref().map(|s| s.chosen);

    let mut cells = Vec::new();
    for (j, &noise) in cfg.noise_levels.iter().enumerate() {
        let seed = noise_seed(j);
        let noisy = NoiseSpec::new(noise, seed).map(|spec| inject_label_noise(&train, &spec));
        for &model in &cfg.models {
            let base = CellReport::empty(name, noise, model, split_seed, seed);
            let cell = match &noisy {
                Err(e) => base.with_status(CellStatus::Failed, e.to_string()),
                Ok(_) if model == ModelKind::GbfsvmTfn && !src.is_synthetic() => {
                    base.with_status(CellStatus::Skipped, "triangular labels only on synthetic data")
                }
                Ok(tr) => run_cell(cfg, base, tr, &test, threshold),
            };
            info!(
                "{name} noise={noise:.2} {model}: {} best={:?}",
                cell.status.name(),
                cell.best_accuracy
            );
            cells.push(cell);
        }
    }
    (cells, selection)
}

/// Picks the grid threshold with the best GBFSVM validation accuracy on a fold
/// carved from the noise-free training set. Ties keep the earlier threshold.
fn select_purity(cfg: &ExperimentConfig, name: &str, train: &Dataset<f64>) -> PuritySelection {
    if let Some(t) = cfg.purity_threshold {
        return PuritySelection {
            dataset: name.to_string(),
            trials: Vec::new(),
            chosen: t,
        };
    }
    let fold = split_indices(train, cfg.test_fraction, derive_seed(cfg.seed, TAG_VALIDATION))
        .map(|(a, b)| (train.subset(&a), train.subset(&b)));
    let mut trials = Vec::new();
    for &t in &cfg.purity_grid {
        let trial = fold.as_ref().map_err(|e| Error::InvalidDataset(e.to_string())).and_then(|(sub, val)| {
            let mc = ModelConfig::new(cfg.c, Variant::Gbfsvm)?;
            let (ts, balls) = prepare_balls(cfg, sub, t, true)?;
            let sol = svm::solve(&ts, &mc, &cfg.pso, 1)?;
            Ok((sol.accuracy(val), balls))
        });
        trials.push(match trial {
            Ok((acc, balls)) => PurityTrial {
                threshold: t,
                accuracy: Some(acc),
                ball_count: Some(balls),
                error: None,
            },
            Err(e) => PurityTrial {
                threshold: t,
                accuracy: None,
                ball_count: None,
                error: Some(e.to_string()),
            },
        });
    }
    let chosen = trials
        .iter()
        .filter_map(|t| t.accuracy.map(|a| (t.threshold, a)))
        .fold(None::<(f64, f64)>, |best, (t, a)| match best {
            Some((_, b)) if b >= a => best,
            _ => Some((t, a)),
        })
        .map(|(t, _)| t)
        .unwrap_or(cfg.purity_grid[0]);
    info!("{name}: purity threshold {chosen}");
    PuritySelection {
        dataset: name.to_string(),
        trials,
        chosen,
    }
}

fn with_memberships(cfg: &ExperimentConfig, d: &Dataset<f64>) -> Result<(Dataset<f64>, crate::membership::ClassGeometry<f64>)> {
    let g = fit_class_geometry(d, cfg.epsilon)?;
    let mu = g.memberships_for(d);
    Ok((d.clone().with_memberships(mu)?, g))
}

fn fuzzy_balls(cfg: &ExperimentConfig, d: &Dataset<f64>, threshold: f64, fuzzy: bool) -> Result<FuzzyBallSet<f64>> {
    if !fuzzy {
        return generate_balls(d, &cfg.ball_config(threshold));
    }
    let (d, g) = with_memberships(cfg, d)?;
    let fbs = generate_balls(&d, &cfg.ball_config(threshold))?;
    match cfg.ball_membership {
        BallMembership::Samples => attach_membership_from_samples(&fbs, &d),
        BallMembership::Center => attach_membership_from_function(&fbs, |x, y| g.membership(x, y)),
    }
}

fn prepare_balls(cfg: &ExperimentConfig, d: &Dataset<f64>, threshold: f64, fuzzy: bool) -> Result<(BallTrainingSet<f64>, usize)> {
    let fbs = fuzzy_balls(cfg, d, threshold, fuzzy)?;
    let variant = if fuzzy { Variant::Gbfsvm } else { Variant::Gbsvm };
    Ok((BallTrainingSet::from_balls(&fbs)?.degenerate(variant), fbs.len()))
}

enum Prepared {
    Dual(BallTrainingSet<f64>, ModelConfig<f64>),
    Tfn(TfnBallTrainingSet<f64>, ConfidenceLevel<f64>),
}

fn prepare(cfg: &ExperimentConfig, model: ModelKind, train: &Dataset<f64>, threshold: f64) -> Result<(Prepared, Option<usize>)> {
    Ok(match model {
        ModelKind::Svm => (
            Prepared::Dual(
                BallTrainingSet::from_points(train, None)?.degenerate(Variant::Svm),
                ModelConfig::new(cfg.c, Variant::Svm)?,
            ),
            None,
        ),
        ModelKind::Fsvm => {
            let (d, _) = with_memberships(cfg, train)?;
            (
                Prepared::Dual(BallTrainingSet::from_points(&d, None)?, ModelConfig::new(cfg.c, Variant::Fsvm)?),
                None,
            )
        }
        ModelKind::Gbsvm | ModelKind::Gbfsvm => {
            let variant = model.variant().expect("dual model");
            let (ts, n) = prepare_balls(cfg, train, threshold, variant == Variant::Gbfsvm)?;
            (Prepared::Dual(ts, ModelConfig::new(cfg.c, variant)?), Some(n))
        }
        ModelKind::GbfsvmTfn => {
            let fbs = fuzzy_balls(cfg, train, threshold, true)?;
            (
                Prepared::Tfn(TfnBallTrainingSet::from_balls(&fbs)?, ConfidenceLevel::new(cfg.lambda)?),
                Some(fbs.len()),
            )
        }
    })
}

/// A single fitted model with its preparation details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub solution: crate::svm::DualSolution<f64>,
    pub ball_count: Option<usize>,
    pub purity_threshold: Option<f64>,
}

/// Fits `model` on `train` with the best of `cfg.runs_per_cell` swarm runs.
/// Fails when no run meets the equality tolerance.
pub fn train_model(cfg: &ExperimentConfig, model: ModelKind, train: &Dataset<f64>, threshold: f64) -> Result<TrainedModel> {
    let (prepared, ball_count) = prepare(cfg, model, train, threshold)?;
    let solution = match &prepared {
        Prepared::Dual(ts, mc) => svm::train_best_of_runs(ts, mc, &cfg.pso, cfg.runs_per_cell)?,
        Prepared::Tfn(ts, lambda) => tfn::train_tfn_best_of_runs(ts, *lambda, cfg.c, &cfg.pso, cfg.runs_per_cell)?,
    };
    Ok(TrainedModel {
        solution,
        ball_count,
        purity_threshold: model.uses_balls().then_some(threshold),
    })
}

fn run_cell(
    cfg: &ExperimentConfig,
    mut cell: CellReport,
    train: &Dataset<f64>,
    test: &Dataset<f64>,
    threshold: Option<f64>,
) -> CellReport {
    let uses_balls = cell.model.uses_balls();
    let threshold = threshold.unwrap_or(BallGenConfig::<f64>::default().purity_threshold);
    if uses_balls {
        cell.purity_threshold = Some(threshold);
    }

    let t0 = Instant::now();
    let prepared = prepare(cfg, cell.model, train, threshold);
    let prep_seconds = t0.elapsed().as_secs_f64();
    let (prepared, balls) = match prepared {
        Ok(p) => p,
        Err(e) => return cell.with_status(CellStatus::Failed, e.to_string()),
    };
    cell.ball_count = balls;

    for k in 0..cfg.runs_per_cell {
        let pso_cfg = cfg.pso.clone().with_seed(cfg.pso.seed.wrapping_add(k as u64));
        let t = Instant::now();
        let sol = match &prepared {
            Prepared::Dual(ts, mc) => svm::solve(ts, mc, &pso_cfg, 1),
            Prepared::Tfn(ts, lambda) => tfn::solve_tfn(ts, *lambda, cfg.c, &pso_cfg, 1),
        };
        let seconds = prep_seconds + t.elapsed().as_secs_f64();
        cell.runs.push(match &sol {
            Ok(s) => RunRecord {
                seed: pso_cfg.seed,
                accuracy: Some(s.accuracy(test)),
                objective: Some(s.objective),
                feasibility_gap: Some(s.feasibility_gap),
                feasible: s.feasible,
                degenerate: s.degenerate,
                seconds,
                error: None,
            },
            Err(e) => RunRecord {
                seed: pso_cfg.seed,
                accuracy: None,
                objective: None,
                feasibility_gap: None,
                feasible: false,
                degenerate: false,
                seconds,
                error: Some(e.to_string()),
            },
        });
    }
    summarize(cell)
}

fn summarize(mut cell: CellReport) -> CellReport {
    let n = cell.runs.len() as f64;
    cell.seconds = Some(cell.runs.iter().map(|r| r.seconds).sum::<f64>() / n);
    let recovered: Vec<usize> = (0..cell.runs.len()).filter(|&k| cell.runs[k].accuracy.is_some()).collect();
    if recovered.is_empty() {
        let msg = cell.runs.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return cell.with_status(CellStatus::Failed, msg);
    }
    let feasible: Vec<usize> = recovered.iter().copied().filter(|&k| cell.runs[k].feasible).collect();
    let pool = if feasible.is_empty() { &recovered } else { &feasible };
    let accs: Vec<f64> = pool.iter().map(|&k| cell.runs[k].accuracy.unwrap_or(0.0)).collect();
    cell.best_accuracy = accs.iter().copied().reduce(f64::max);
    cell.mean_accuracy = Some(accs.iter().sum::<f64>() / accs.len() as f64);

    // Best-of-runs choice: highest objective among feasible runs, else lowest residual.
    let key = |k: usize| &cell.runs[k];
    let selected = if feasible.is_empty() {
        recovered.iter().copied().reduce(|b, k| {
            if key(k).feasibility_gap < key(b).feasibility_gap { k } else { b }
        })
    } else {
        feasible.iter().copied().reduce(|b, k| if key(k).objective > key(b).objective { k } else { b })
    }
    .expect("nonempty");
    cell.selected_run = Some(selected);
    cell.selected_accuracy = cell.runs[selected].accuracy;
    if feasible.is_empty() {
        cell.status = CellStatus::Infeasible;
        cell.message = Some("no run met the equality tolerance".into());
    } else {
        cell.status = CellStatus::Ok;
    }
    cell
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidParameter(format!("unknown report format {s:?}"))),
        }
    }
}

pub fn render_report(r: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Markdown => Ok(render_markdown(r)),
        ReportFormat::Csv => render_csv(r),
        ReportFormat::Json => r.to_json(),
    }
}

pub const ACCURACY_HEADING: &str = "## Accuracy";
pub const RUNTIME_HEADING: &str = "## Runtime";

fn accuracy_entry(c: &CellReport) -> String {
    match (c.status, c.best_accuracy, c.mean_accuracy) {
        (CellStatus::Skipped, ..) => "skipped".into(),
        (CellStatus::Ok, Some(b), Some(m)) => format!("{b:.4} / {m:.4}"),
        (CellStatus::Infeasible, Some(b), Some(m)) => format!("{b:.4} / {m:.4} *"),
        _ => "failed".into(),
    }
}

/// Accuracy section of the markdown report: rows noise x model, columns
/// datasets. Contains no timing, so it is reproducible byte for byte.
pub fn render_accuracy_table(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{ACCURACY_HEADING}\n");
    let _ = writeln!(
        s,
        "Best / mean test accuracy over runs. `*`: no run met the equality tolerance.\n"
    );
    let _ = writeln!(s, "| noise | model | {} |", r.datasets.join(" | "));
    let _ = writeln!(s, "|---|---|{}", "---|".repeat(r.datasets.len()));
    for &noise in &r.noise_levels {
        for &model in &r.models {
            let entries: Vec<String> = r
                .datasets
                .iter()
                .map(|d| r.cell(d, noise, model).map(accuracy_entry).unwrap_or_else(|| "missing".into()))
                .collect();
            let _ = writeln!(s, "| {:.0}% | {} | {} |", noise * 100.0, model, entries.join(" | "));
        }
    }
    s
}

/// Mean seconds per run, averaged over noise levels: rows datasets, columns
/// models.
pub fn render_runtime_table(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{RUNTIME_HEADING}\n");
    if r.parallel {
        let _ = writeln!(s, "Omitted: datasets ran concurrently.");
        return s;
    }
    let _ = writeln!(
        s,
        "Mean seconds per run (membership, ball generation and training), averaged over noise levels.\n"
    );
    let names: Vec<&str> = r.models.iter().map(|m| m.name()).collect();
    let _ = writeln!(s, "| dataset | {} |", names.join(" | "));
    let _ = writeln!(s, "|---|{}", "---|".repeat(r.models.len()));
    for d in &r.datasets {
        let entries: Vec<String> = r
            .models
            .iter()
            .map(|&m| {
                let times: Vec<f64> = r
                    .cells
                    .iter()
                    .filter(|c| &c.dataset == d && c.model == m)
                    .filter_map(|c| c.seconds)
                    .collect();
                if times.is_empty() {
                    "n/a".into()
                } else {
                    format!("{:.3}", times.iter().sum::<f64>() / times.len() as f64)
                }
            })
            .collect();
        let _ = writeln!(s, "| {d} | {} |", entries.join(" | "));
    }
    s
}

fn render_markdown(r: &ExperimentReport) -> String {
    let mut s = String::from("# Label-noise benchmark\n\n");
    s.push_str(&render_accuracy_table(r));
    s.push('\n');
    s.push_str(&render_runtime_table(r));
    if !r.purity.is_empty() {
        s.push_str("\n## Purity threshold\n\n| dataset | validation accuracy by threshold | chosen |\n|---|---|---|\n");
        for p in &r.purity {
            let trials = if p.trials.is_empty() {
                "fixed".to_string()
            } else {
                p.trials
                    .iter()
                    .map(|t| match t.accuracy {
                        Some(a) => format!("{:.2}: {a:.4}", t.threshold),
                        None => format!("{:.2}: failed", t.threshold),
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let _ = writeln!(s, "| {} | {trials} | {:.2} |", p.dataset, p.chosen);
        }
    }
    let notes: Vec<&CellReport> = r
        .cells
        .iter()
        .filter(|c| matches!(c.status, CellStatus::Failed | CellStatus::Infeasible))
        .collect();
    if !notes.is_empty() {
        s.push_str("\n## Failures\n\n");
        for c in notes {
            let _ = writeln!(
                s,
                "- {} {:.0}% {}: {} ({})",
                c.dataset,
                c.noise * 100.0,
                c.model,
                c.status.name(),
                c.message.as_deref().unwrap_or("")
            );
        }
    }
    s
}

/// One row per cell.
pub const CSV_HEADER: [&str; 15] = [
    "dataset",
    "noise",
    "model",
    "status",
    "best_accuracy",
    "mean_accuracy",
    "selected_accuracy",
    "seconds",
    "ball_count",
    "purity_threshold",
    "feasible_runs",
    "runs",
    "split_seed",
    "noise_seed",
    "message",
];

fn render_csv(r: &ExperimentReport) -> Result<String> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for c in &r.cells {
        w.write_record([
            c.dataset.clone(),
            c.noise.to_string(),
            c.model.name().to_string(),
            c.status.name().to_string(),
            opt(c.best_accuracy),
            opt(c.mean_accuracy),
            opt(c.selected_accuracy),
            opt(c.seconds),
            c.ball_count.map(|b| b.to_string()).unwrap_or_default(),
            opt(c.purity_threshold),
            c.runs.iter().filter(|r| r.feasible).count().to_string(),
            c.runs.len().to_string(),
            c.split_seed.to_string(),
            c.noise_seed.to_string(),
            c.message.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}
