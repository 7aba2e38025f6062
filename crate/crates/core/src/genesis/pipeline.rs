use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::experience::{ExperienceRule, DEFAULT_DIMENSION};
use crate::gridworld::{compute_distance_field, safe_space, OccupancyGrid, SceneObject, SensorConfig};
use crate::planner::{
    discretize, sample_task_endpoints, EndpointRejection, EndpointSample, ObservationTriplet, PlanError,
    TrajectoryRecord, DEFAULT_MAX_LENGTH,
};
use crate::seed::derive_seed;

use super::scene::{place_objects, RelationConfig, SyntheticScene, DEFAULT_CATALOG};
use super::synth::{RuleRequest, SynthOutcome, SynthRequest, TaskCategory, TaskSynthesizer};
use super::verify::{verify, Rejection, Verdict};
use super::{GenesisError, GroundTruth, Provenance, TargetRef, TaskTuple, DEFAULT_WALL_LABELS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenesisConfig {
    pub n_tasks: usize,
    pub density: f64,
    pub catalog: Vec<String>,
    pub wall_labels: Vec<String>,
    /// Minimum obstacle clearance of trajectory endpoints, in cells.
    pub clearance_cells: f64,
    /// Trajectories must be strictly shorter than this (meters).
    pub max_length: f64,
    pub sensor: SensorConfig,
    pub relations: RelationConfig,
    pub dimension: usize,
    /// Candidate budget; the run stops early once `n_tasks` are accepted.
    pub max_attempts: usize,
}

impl Default for GenesisConfig {
    fn default() -> Self {
        Self {
            n_tasks: 100,
            density: 0.02,
            catalog: DEFAULT_CATALOG.iter().map(|s| s.to_string()).collect(),
            wall_labels: DEFAULT_WALL_LABELS.iter().map(|s| s.to_string()).collect(),
            clearance_cells: 5.0,
            max_length: DEFAULT_MAX_LENGTH,
            sensor: SensorConfig::default(),
            relations: RelationConfig::default(),
            dimension: DEFAULT_DIMENSION,
            max_attempts: 20_000,
        }
    }
}

/// Shared inputs for task synthesis.
#[derive(Debug, Clone)]
pub struct TaskContext<'a> {
    pub grid_id: &'a str,
    pub master_seed: u64,
    pub catalog: &'a [String],
    pub wall_labels: &'a [String],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionStats {
    pub attempts: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<String, usize>,
    /// Sampled categories, including those of later-rejected candidates.
    pub sampled_categories: BTreeMap<String, usize>,
}

impl RejectionStats {
    fn reject(&mut self, reason: Rejection) {
        *self.rejected.entry(reason.as_str().to_string()).or_default() += 1;
    }

    pub fn total_rejected(&self) -> usize {
        self.rejected.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenesisOutput {
    pub scene: SyntheticScene,
    pub tasks: Vec<TaskTuple>,
    pub rules: Vec<ExperienceRule>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub stats: RejectionStats,
}

/// Builds a task from the endpoint forward view of a discretized trajectory.
///
/// The category is drawn uniformly from the eight categories. The returned tuple has
/// no knowledge ids yet and has not been verified.
pub fn synthesize_task(
    scene: &SyntheticScene,
    trajectory_id: &str,
    triplets: &[ObservationTriplet],
    synth: &dyn TaskSynthesizer,
    ctx: &TaskContext<'_>,
    rng_seed: u64,
) -> Result<TaskTuple, (TaskCategory, Rejection)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let category = TaskCategory::ALL[rng.gen_range(0..TaskCategory::ALL.len())];
    let synth_seed: u64 = rng.gen();
    let Some(last) = triplets.last() else {
        return Err((category, Rejection::TrajectoryTooShort));
    };
    let forward = &last.forward;
    if forward.objects.is_empty() {
        return Err((category, Rejection::NoVisibleTarget));
    }
    let visible: Vec<&SceneObject> = forward
        .objects
        .iter()
        .filter(|s| !ctx.wall_labels.contains(&s.label))
        .filter_map(|s| scene.object(s.object_id))
        .collect();
    if visible.is_empty() {
        return Err((category, Rejection::WallOnlyTarget));
    }
    let ids: BTreeSet<usize> = visible.iter().map(|o| o.id).collect();
    let triples = scene
        .scene_graph
        .iter()
        .filter(|t| ids.contains(&t.subject) && ids.contains(&t.object))
        .copied()
        .collect();
    let request = SynthRequest {
        category,
        forward,
        visible,
        triples,
        catalog: ctx.catalog,
        seed: synth_seed,
    };
    let task = match synth.synthesize(&request) {
        SynthOutcome::Task(t) => t,
        SynthOutcome::Refuse(_) => return Err((category, Rejection::SynthesizerRefused)),
    };
    let target = scene
        .object(task.target_object)
        .ok_or((category, Rejection::NoVisibleTarget))?;
    let mut stage_seeds = BTreeMap::new();
    stage_seeds.insert("task".to_string(), rng_seed);
    stage_seeds.insert("synth".to_string(), synth_seed);
    Ok(TaskTuple {
        id: String::new(),
        instruction: task.question,
        category,
        trajectory_id: trajectory_id.to_string(),
        keypoints: triplets.to_vec(),
        ground_truth: GroundTruth {
            answer_text: task.answer,
            forward_observation: triplets.len() - 1,
            target: TargetRef {
                object_id: target.id,
                label: target.label.clone(),
                cell: target.cell,
            },
            format: task.format,
        },
        knowledge: Vec::new(),
        provenance: Provenance {
            grid_id: ctx.grid_id.to_string(),
            master_seed: ctx.master_seed,
            stage_seeds,
        },
    })
}

/// One rule per keypoint explaining the forward choice; declined keypoints are skipped.
pub fn synthesize_rules(
    triplets: &[ObservationTriplet],
    task: &TaskTuple,
    synth: &dyn TaskSynthesizer,
    dimension: usize,
) -> Result<Vec<ExperienceRule>, GenesisError> {
    let mut rules = Vec::with_capacity(triplets.len());
    for t in triplets {
        let req = RuleRequest {
            category: task.category,
            instruction: &task.instruction,
            forward: &t.forward,
            step: t.step,
            target_label: Some(&task.ground_truth.target.label),
        };
        if let Some(text) = synth.rule(&req) {
            rules.push(ExperienceRule::new(
                format!("{}-r{}", task.id, t.step),
                text.task_text,
                text.scene_text,
                text.full_text,
                task.trajectory_id.clone(),
                dimension,
            )?);
        }
    }
    Ok(rules)
}

/// Full synthesis run on one grid: object placement, then repeated
/// sample → plan → discretize → synthesize → verify until `n_tasks` are accepted or
/// the attempt budget runs out.
pub fn run_genesis(
    grid: &OccupancyGrid,
    grid_id: &str,
    cfg: &GenesisConfig,
    synth: &dyn TaskSynthesizer,
    master_seed: u64,
) -> Result<GenesisOutput, GenesisError> {
    let scene = place_objects(
        grid,
        grid_id,
        &cfg.catalog,
        cfg.density,
        &cfg.relations,
        derive_seed(master_seed, &[1]),
    )?;
    let field = compute_distance_field(grid);
    let safe = safe_space(grid, &field, cfg.clearance_cells);
    if safe.is_empty() {
        return Err(PlanError::EmptySafeSpace.into());
    }
    let ctx = TaskContext {
        grid_id,
        master_seed,
        catalog: &cfg.catalog,
        wall_labels: &cfg.wall_labels,
    };

    let mut stats = RejectionStats::default();
    let mut tasks = Vec::new();
    let mut rules = Vec::new();
    let mut trajectories = Vec::new();
    for attempt in 0..cfg.max_attempts {
        if tasks.len() >= cfg.n_tasks {
            break;
        }
        stats.attempts += 1;
        let a = attempt as u64;
        let endpoint_seed = derive_seed(master_seed, &[2, a]);
        let mut traj = match sample_task_endpoints(grid, &safe, endpoint_seed, cfg.max_length)? {
            EndpointSample::Accepted { trajectory, .. } => trajectory,
            EndpointSample::Rejected { reason, .. } => {
                stats.reject(match reason {
                    EndpointRejection::NotFound => Rejection::EndpointUnreachable,
                    EndpointRejection::TooLong { .. } => Rejection::TrajectoryTooLong,
                });
                continue;
            }
        };
        if traj.waypoints.len() < 2 {
            stats.reject(Rejection::TrajectoryTooShort);
            continue;
        }
        let discretize_seed = derive_seed(master_seed, &[3, a]);
        let triplets = discretize(grid, &mut traj, &scene.objects, cfg.sensor, discretize_seed)?;
        let trajectory_id = format!("{grid_id}-p{attempt:05}");
        let task_seed = derive_seed(master_seed, &[4, a]);
        let mut task = match synthesize_task(&scene, &trajectory_id, &triplets, synth, &ctx, task_seed) {
            Ok(t) => {
                *stats.sampled_categories.entry(t.category.to_string()).or_default() += 1;
                t
            }
            Err((category, reason)) => {
                *stats.sampled_categories.entry(category.to_string()).or_default() += 1;
                stats.reject(reason);
                continue;
            }
        };
        task.id = format!("{grid_id}-t{:04}", tasks.len());
        task.provenance.stage_seeds.insert("endpoints".into(), endpoint_seed);
        task.provenance.stage_seeds.insert("discretize".into(), discretize_seed);
        let task_rules = synthesize_rules(&triplets, &task, synth, cfg.dimension)?;
        match verify(&task, &task_rules, &cfg.wall_labels) {
            Verdict::Accepted => {
                task.knowledge = task_rules.iter().map(|r| r.id.clone()).collect();
                trajectories.push(traj.to_record(&trajectory_id, grid_id));
                rules.extend(task_rules);
                tasks.push(task);
                stats.accepted += 1;
            }
            Verdict::Rejected(reason) => stats.reject(reason),
        }
    }
    Ok(GenesisOutput {
        scene,
        tasks,
        rules,
        trajectories,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genesis::TemplateSynthesizer;
    use crate::gridworld::{generate_maze, MazeSpec};

    #[test]
    fn maze_run_is_deterministic_and_verified() {
        let grid = generate_maze(&MazeSpec::default(), 3).unwrap();
        let cfg = GenesisConfig {
            n_tasks: 8,
            ..GenesisConfig::default()
        };
        let synth = TemplateSynthesizer::new();
        let a = run_genesis(&grid, "m3", &cfg, &synth, 11).unwrap();
        let b = run_genesis(&grid, "m3", &cfg, &synth, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tasks.len(), 8);
        for t in &a.tasks {
            let rules: Vec<_> = a.rules.iter().filter(|r| t.knowledge.contains(&r.id)).cloned().collect();
            assert_eq!(rules.len(), t.keypoints.len());
            assert_eq!(verify(t, &rules, &cfg.wall_labels), Verdict::Accepted);
        }
        assert_eq!(a.stats.accepted, 8);
        assert_eq!(a.stats.attempts, a.stats.accepted + a.stats.total_rejected());
    }
}
