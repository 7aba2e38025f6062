//! Command implementations behind the `sage` binary: run configuration, dataset
//! files, training and evaluation runs, and the trace chart.

mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::{
    build_dataset, split_indices, train, Checkpoint, EvolutionConfig, EvolutionDataset, EvolutionError, LinearPolicy,
    TrainingTrace, World,
};
use crate::experience::{ExperienceError, ExperienceStore};
use crate::genesis::{
    read_tasks, run_genesis, write_tasks, GenesisConfig, GenesisError, RejectionStats, SyntheticScene, TaskTuple,
    TemplateSynthesizer,
};
use crate::gridworld::{generate_maze, GridError, MazeSpec, OccupancyGrid};
use crate::metrics::{report, write_report, MetricsError};
use crate::navigation::{read_episodes, run_episode, write_episodes, EpisodeResult, NavConfig, NavError, PolicyKind};
use crate::planner::{write_trajectories, PlanError};
use crate::seed::derive_seed;

pub use svg::trace_chart;

/// Environment variable naming the directory that relative paths are resolved against.
pub const RUN_ROOT_ENV: &str = "SAGE_RUN_ROOT";

const STREAM_MAZE: u64 = 10;
const STREAM_GENESIS: u64 = 11;
const STREAM_SPLIT: u64 = 20;
const STREAM_POLICY: u64 = 30;

/// Failure with its process exit code: 1 usage, 2 data, 3 numeric.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error!(
    std::io::Error,
    serde_json::Error,
    GenesisError,
    GridError,
    PlanError,
    ExperienceError,
    MetricsError,
    NavError
);

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::NonFiniteGradient => CliError::Numeric(e.to_string()),
            EvolutionError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Which navigation policy a run uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    /// Argmax of the trained linear scorer (needs a checkpoint).
    #[default]
    Linear,
    /// Privileged geodesic-greedy oracle.
    Oracle,
    /// Uniform over the candidates.
    Random,
    /// Always the first candidate.
    FirstFrontier,
}

/// Every parameter of a run. Written next to the outputs of each command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub master_seed: u64,
    /// `n_tasks` is the total over all grids.
    pub genesis: GenesisConfig,
    /// Number of procedural mazes when no grid files are given.
    pub mazes: usize,
    pub maze: MazeSpec,
    pub evolution: EvolutionConfig,
    pub val_fraction: f64,
    pub navigation: NavConfig,
    pub policy: PolicyName,
    /// Cap on navigation episodes; all tasks when absent.
    pub episodes: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            genesis: GenesisConfig {
                n_tasks: 500,
                ..GenesisConfig::default()
            },
            mazes: 5,
            maze: MazeSpec::default(),
            evolution: EvolutionConfig::default(),
            val_fraction: 0.1,
            navigation: NavConfig::default(),
            policy: PolicyName::default(),
            episodes: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Parses a (possibly partial) JSON config; missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Resolves a relative path against `root` when one is given.
pub fn resolve(path: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) if path.is_relative() => r.join(path),
        _ => path.to_path_buf(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Rejection counts for the whole run and per grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub total: RejectionStats,
    pub per_grid: BTreeMap<String, RejectionStats>,
}

/// Grids with their ids, either loaded from files or generated as mazes.
pub fn input_grids(cfg: &RunConfig, files: &[PathBuf]) -> Result<Vec<(String, OccupancyGrid)>, CliError> {
    if files.is_empty() {
        return (0..cfg.mazes)
            .map(|i| {
                let grid = generate_maze(&cfg.maze, derive_seed(cfg.master_seed, &[STREAM_MAZE, i as u64]))?;
                Ok((format!("maze{i:02}"), grid))
            })
            .collect();
    }
    let mut seen = BTreeSet::new();
    files
        .iter()
        .map(|f| {
            let id = f
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::Usage(format!("bad grid file name {}", f.display())))?
                .to_string();
            if !seen.insert(id.clone()) {
                return Err(CliError::Usage(format!("duplicate grid id {id}")));
            }
            Ok((id, OccupancyGrid::load(f)?))
        })
        .collect()
}

/// Where a dataset lives. The task and rule files may be named freely; everything else
/// sits in `dir`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataLayout {
    pub dir: PathBuf,
    pub tasks: PathBuf,
    pub rules: PathBuf,
}

impl DataLayout {
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        Self {
            tasks: dir.join("tasks.jsonl"),
            rules: dir.join("rules.json"),
            dir,
        }
    }
}

/// Synthesizes tasks on every grid and writes the dataset: the task and rule files plus
/// `rejection-statistics.json`, `scenes.json`, `trajectories.jsonl`, `grids/<id>.txt`
/// and the resolved `config.json` in the layout's directory.
pub fn cmd_genesis(
    cfg: &RunConfig,
    grids: &[(String, OccupancyGrid)],
    layout: &DataLayout,
) -> Result<RejectionReport, CliError> {
    let out = layout.dir.as_path();
    if grids.is_empty() && cfg.genesis.n_tasks > 0 {
        return Err(CliError::Usage("no grids to synthesize on".into()));
    }
    fs::create_dir_all(out.join("grids"))?;
    let synth = TemplateSynthesizer::new();
    let mut tasks = Vec::new();
    let mut trajectories = Vec::new();
    let mut scenes = Vec::new();
    let mut store = ExperienceStore::new(cfg.genesis.dimension);
    let mut stats = RejectionReport::default();
    let n = grids.len().max(1);
    for (i, (id, grid)) in grids.iter().enumerate() {
        let quota = cfg.genesis.n_tasks / n + usize::from(i < cfg.genesis.n_tasks % n);
        let gcfg = GenesisConfig {
            n_tasks: quota,
            ..cfg.genesis.clone()
        };
        let result = run_genesis(grid, id, &gcfg, &synth, derive_seed(cfg.master_seed, &[STREAM_GENESIS, i as u64]))?;
        for r in result.rules {
            store.insert(r)?;
        }
        accumulate(&mut stats.total, &result.stats);
        stats.per_grid.insert(id.clone(), result.stats);
        tasks.extend(result.tasks);
        trajectories.extend(result.trajectories);
        scenes.push(result.scene);
        grid.save(out.join("grids").join(format!("{id}.txt")))?;
    }
    for parent in [layout.tasks.parent(), layout.rules.parent()].into_iter().flatten() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_tasks(BufWriter::new(fs::File::create(&layout.tasks)?), &tasks)?;
    write_trajectories(BufWriter::new(fs::File::create(out.join("trajectories.jsonl"))?), &trajectories)?;
    store.save(&layout.rules)?;
    write_json(&out.join("scenes.json"), &scenes)?;
    write_json(&out.join("rejection-statistics.json"), &stats)?;
    write_json(&out.join("config.json"), cfg)?;
    Ok(stats)
}

fn accumulate(total: &mut RejectionStats, part: &RejectionStats) {
    total.attempts += part.attempts;
    total.accepted += part.accepted;
    for (k, v) in &part.rejected {
        *total.rejected.entry(k.clone()).or_default() += v;
    }
    for (k, v) in &part.sampled_categories {
        *total.sampled_categories.entry(k.clone()).or_default() += v;
    }
}

/// A dataset directory loaded back into memory.
#[derive(Debug, Clone)]
pub struct DataDir {
    pub tasks: Vec<TaskTuple>,
    pub store: ExperienceStore,
    pub worlds: BTreeMap<String, World>,
}

pub fn load_data(layout: &DataLayout) -> Result<DataDir, CliError> {
    let dir = layout.dir.as_path();
    let file = fs::File::open(&layout.tasks).map_err(|e| CliError::Data(format!("{}: {e}", layout.tasks.display())))?;
    let tasks = read_tasks(BufReader::new(file))?;
    let store = ExperienceStore::load(&layout.rules)?;
    let scenes: Vec<SyntheticScene> = read_json(&dir.join("scenes.json"))?;
    let mut worlds = BTreeMap::new();
    for scene in scenes {
        let grid = OccupancyGrid::load(dir.join("grids").join(format!("{}.txt", scene.grid_id)))?;
        worlds.insert(scene.grid_id.clone(), World { grid, scene });
    }
    Ok(DataDir { tasks, store, worlds })
}

/// Everything training needs: candidate frames, a disjoint split and a store holding
/// only the rules distilled from training-split trajectories.
#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub dataset: EvolutionDataset,
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
    pub store: ExperienceStore,
}

pub fn prepare_training(data: &DataDir, cfg: &RunConfig) -> Result<TrainingSetup, CliError> {
    if !(0.0..1.0).contains(&cfg.val_fraction) {
        return Err(CliError::Usage("validation fraction must lie in [0, 1)".into()));
    }
    let dataset = build_dataset(&data.tasks, &data.worlds, cfg.genesis.sensor, &cfg.evolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[STREAM_SPLIT]));
    let (train_idx, val_idx) = split_indices(dataset.instances.len(), cfg.val_fraction, &mut rng);
    let keep: BTreeSet<&str> = train_idx.iter().map(|&i| data.tasks[i].trajectory_id.as_str()).collect();
    let mut store = ExperienceStore::new(data.store.dimension());
    for r in data.store.rules() {
        if keep.contains(r.trajectory_id.as_str()) {
            store.insert(r.clone())?;
        }
    }
    Ok(TrainingSetup {
        dataset,
        train_idx,
        val_idx,
        store,
    })
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub final_validation: f64,
    pub steps: usize,
    pub train_tasks: usize,
    pub val_tasks: usize,
    pub weights: Vec<f64>,
}

/// Trains from a zero-weight policy and writes `checkpoint.json`, `trace.csv`,
/// `trace.svg`, `store.json` (training-split rules), `summary.json` and `config.json`.
pub fn cmd_evolve(cfg: &RunConfig, setup: &TrainingSetup, out: &Path) -> Result<(LinearPolicy, TrainingTrace), CliError> {
    fs::create_dir_all(out)?;
    let mut policy = LinearPolicy::zeros(cfg.evolution.temperature);
    let trace = train(
        &setup.dataset,
        &setup.train_idx,
        &setup.val_idx,
        &setup.store,
        &mut policy,
        &cfg.evolution,
    )?;
    Checkpoint::new(&policy, trace.rows.len(), &cfg.evolution).save(out.join("checkpoint.json"))?;
    trace.write_csv(BufWriter::new(fs::File::create(out.join("trace.csv"))?))?;
    fs::write(out.join("trace.svg"), trace_chart(&trace.rows))?;
    setup.store.save(out.join("store.json"))?;
    write_json(
        &out.join("summary.json"),
        &EvolveSummary {
            final_validation: trace.final_validation,
            steps: trace.rows.len(),
            train_tasks: setup.train_idx.len(),
            val_tasks: setup.val_idx.len(),
            weights: policy.w.to_vec(),
        },
    )?;
    write_json(&out.join("config.json"), cfg)?;
    Ok((policy, trace))
}

/// Runs one episode per task (capped by `cfg.episodes`) and returns the results in task order.
pub fn run_episodes(
    cfg: &RunConfig,
    data: &DataDir,
    store: &ExperienceStore,
    policy: &PolicyKind,
) -> Result<Vec<EpisodeResult>, CliError> {
    let n = cfg.episodes.unwrap_or(data.tasks.len()).min(data.tasks.len());
    let mut out = Vec::with_capacity(n);
    for (i, task) in data.tasks.iter().take(n).enumerate() {
        let world = data
            .worlds
            .get(&task.provenance.grid_id)
            .ok_or_else(|| CliError::Data(format!("no grid {} for task {}", task.provenance.grid_id, task.id)))?;
        let seed = derive_seed(cfg.navigation.seed, &[STREAM_POLICY, i as u64]);
        let mut p = policy.instantiate(&world.grid, task, seed);
        out.push(run_episode(
            &task.id,
            task,
            &world.grid,
            &world.scene,
            p.as_mut(),
            store,
            &cfg.navigation,
            i as u64,
        )?);
    }
    Ok(out)
}

/// Writes `metrics.csv` for the episodes; with no episodes only the header is written.
pub fn write_metrics(path: &Path, episodes: &[EpisodeResult]) -> Result<(), CliError> {
    let records: Vec<_> = episodes.iter().map(EpisodeResult::eval_record).collect();
    let rows = if records.is_empty() { Vec::new() } else { report(&records)? };
    let mut f = BufWriter::new(fs::File::create(path)?);
    write_report(&mut f, &rows)?;
    f.flush()?;
    Ok(())
}

/// Runs navigation episodes and writes `episodes.jsonl`, `metrics.csv` and `config.json`.
pub fn cmd_navigate(
    cfg: &RunConfig,
    data: &DataDir,
    store: &ExperienceStore,
    policy: &PolicyKind,
    out: &Path,
) -> Result<Vec<EpisodeResult>, CliError> {
    fs::create_dir_all(out)?;
    let episodes = run_episodes(cfg, data, store, policy)?;
    write_episodes(BufWriter::new(fs::File::create(out.join("episodes.jsonl"))?), &episodes)?;
    write_metrics(&out.join("metrics.csv"), &episodes)?;
    write_json(&out.join("config.json"), cfg)?;
    Ok(episodes)
}

/// Recomputes metrics from an episodes file.
pub fn cmd_eval(episodes: &Path, out: &Path) -> Result<Vec<EpisodeResult>, CliError> {
    let file = fs::File::open(episodes).map_err(|e| CliError::Data(format!("{}: {e}", episodes.display())))?;
    let eps = read_episodes(BufReader::new(file))?;
    write_metrics(out, &eps)?;
    Ok(eps)
}

/// Builds the navigation policy, loading the checkpoint when the linear policy is requested.
pub fn policy_for(name: PolicyName, checkpoint: Option<&Path>) -> Result<PolicyKind, CliError> {
    Ok(match name {
        PolicyName::Linear => {
            let path = checkpoint.ok_or_else(|| CliError::Usage("the linear policy needs --checkpoint".into()))?;
            PolicyKind::Linear {
                policy: Checkpoint::load(path)?.policy(),
            }
        }
        PolicyName::Oracle => PolicyKind::Oracle,
        PolicyName::Random => PolicyKind::Random,
        PolicyName::FirstFrontier => PolicyKind::FirstFrontier,
    })
}
