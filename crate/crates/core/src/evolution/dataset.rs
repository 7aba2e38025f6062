//! Candidate-frame datasets built from synthesized tasks, and per-step contexts.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::experience::{embed_with, ExperienceStore, RetrievalMode};
use crate::genesis::{describe_view, SyntheticScene, TaskCategory, TaskTuple};
use crate::gridworld::{visible_cells, CellState, OccupancyGrid, Pose, SceneObject, SensorConfig, VIEW_OFFSETS};
use crate::planner::{geodesic_costs, ViewObservation};

use super::features::{heading_alignment, object_count, query_match, reference_answer, MATCH_DIMENSION};
use super::objective::{reward, rouge_l_f1};
use super::policy::{feature, Features, FEATURE_DIM};
use super::{EvolutionConfig, EvolutionError};

/// Minimum Rouge-L for an answer to count as a match.
pub const MATCH_THRESHOLD: f64 = 0.5;
/// Endpoint forward views borrowed from other tasks on the same grid, per task.
pub const HARD_NEGATIVES: usize = 4;

/// A grid together with the objects placed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub grid: OccupancyGrid,
    pub scene: SyntheticScene,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Task whose trajectory the frame was captured on.
    pub source_task: usize,
    pub keypoint: usize,
    /// 0 forward, 1 left, 2 right.
    pub view: usize,
    /// Features with the experience slot left at zero.
    pub features: Features,
    pub scene_text: String,
    pub scene_embedding: Vec<f64>,
    pub answer: String,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub task_id: String,
    pub instruction: String,
    pub category: TaskCategory,
    pub truth: String,
    pub pool: Vec<Frame>,
    /// Index of the ground-truth frame in `pool`.
    pub gt: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionDataset {
    pub instances: Vec<TaskInstance>,
}

/// Scores an answer against the truth with the shaped reward.
pub fn score_answer(answer: &str, truth: &str, cfg: &EvolutionConfig) -> f64 {
    let match_ok = rouge_l_f1(answer, truth) >= MATCH_THRESHOLD;
    reward(true, match_ok, answer, truth, !match_ok, cfg)
}

fn view_objects<'a>(scene: &'a SyntheticScene, view: &ViewObservation) -> Vec<&'a SceneObject> {
    view.objects.iter().filter_map(|s| scene.object(s.object_id)).collect()
}

/// Builds one instance per task. Candidate frames are the three views at every keypoint
/// plus endpoint forward views of up to [`HARD_NEGATIVES`] other tasks on the same grid.
pub fn build_dataset(
    tasks: &[TaskTuple],
    worlds: &BTreeMap<String, World>,
    sensor: SensorConfig,
    cfg: &EvolutionConfig,
) -> Result<EvolutionDataset, EvolutionError> {
    let mut by_grid: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in tasks.iter().enumerate() {
        by_grid.entry(t.provenance.grid_id.as_str()).or_default().push(i);
    }
    let mut instances = Vec::with_capacity(tasks.len());
    for (ti, task) in tasks.iter().enumerate() {
        let world = worlds
            .get(&task.provenance.grid_id)
            .ok_or_else(|| EvolutionError::MissingWorld(task.provenance.grid_id.clone()))?;
        let grid = &world.grid;
        let (Some(first), Some(last)) = (task.keypoints.first(), task.keypoints.last()) else {
            return Err(EvolutionError::GroundTruthMissing(task.id.clone()));
        };
        if task.ground_truth.forward_observation != task.keypoints.len() - 1 {
            return Err(EvolutionError::GroundTruthMissing(task.id.clone()));
        }
        let start = grid.cell_at(first.pose.x, first.pose.y).ok_or(EvolutionError::OffGrid)?;
        let passable: Vec<bool> = grid.states().iter().map(|&s| s == CellState::Free).collect();
        let dist = geodesic_costs(grid, &passable, start);
        let dist_at = |p: Pose| {
            grid.cell_at(p.x, p.y)
                .and_then(|c| dist[grid.index(c)])
                .map(|c| c.meters(grid.resolution()))
        };
        let path_len = dist_at(last.pose).unwrap_or(0.0).max(grid.resolution());
        let start_seen: BTreeSet<_> = VIEW_OFFSETS
            .iter()
            .flat_map(|off| visible_cells(grid, first.pose.with_heading(first.pose.theta + off), sensor.hfov, sensor.range))
            .collect();
        let query = embed_with(&task.instruction, MATCH_DIMENSION)?;
        let triples_all = &world.scene.scene_graph;

        let mut sources: Vec<(usize, usize, usize)> = Vec::new();
        for k in 0..task.keypoints.len() {
            for v in 0..3 {
                sources.push((ti, k, v));
            }
        }
        let siblings = &by_grid[task.provenance.grid_id.as_str()];
        let pos = siblings.iter().position(|&i| i == ti).expect("task is listed");
        for step in 1..siblings.len().min(HARD_NEGATIVES + 1) {
            let other = siblings[(pos + step) % siblings.len()];
            sources.push((other, tasks[other].keypoints.len() - 1, 0));
        }

        let mut pool = Vec::with_capacity(sources.len());
        let mut gt = None;
        for (src, k, v) in sources {
            let kp = &tasks[src].keypoints[k];
            let obs = kp.views()[v];
            let heading = kp.pose.theta + VIEW_OFFSETS[v];
            let cells = visible_cells(grid, kp.pose.with_heading(heading), sensor.hfov, sensor.range);
            let novelty = if cells.is_empty() {
                0.0
            } else {
                1.0 - cells.intersection(&start_seen).count() as f64 / cells.len() as f64
            };
            let travel = dist_at(kp.pose).map_or(-2.0, |d| (-d / path_len).max(-2.0));
            let objects = view_objects(&world.scene, obs);
            let ids: BTreeSet<usize> = objects.iter().map(|o| o.id).collect();
            let triples: Vec<_> = triples_all
                .iter()
                .filter(|t| ids.contains(&t.subject) && ids.contains(&t.object))
                .copied()
                .collect();
            let answer = reference_answer(task.category, &task.instruction, &objects, &triples);
            let reward = score_answer(&answer, &task.ground_truth.answer_text, cfg);
            let mut f = [0.0; FEATURE_DIM];
            f[feature::TRAVEL_COST] = travel;
            f[feature::NOVELTY] = novelty;
            f[feature::HEADING_ALIGNMENT] = heading_alignment(heading, kp.pose.theta);
            f[feature::IS_MEMORY] = if objects.is_empty() { 0.0 } else { 1.0 };
            f[feature::QUERY_MATCH] = query_match(&query, &objects);
            f[feature::OBJECT_COUNT] = object_count(objects.len());
            f[feature::BIAS] = 1.0;
            let scene_text = describe_view(obs);
            if src == ti && k == task.keypoints.len() - 1 && v == 0 {
                gt = Some(pool.len());
            }
            pool.push(Frame {
                source_task: src,
                keypoint: k,
                view: v,
                features: f,
                scene_embedding: embed_with(&scene_text, MATCH_DIMENSION)?,
                scene_text,
                answer,
                reward,
            });
        }
        instances.push(TaskInstance {
            task_id: task.id.clone(),
            instruction: task.instruction.clone(),
            category: task.category,
            truth: task.ground_truth.answer_text.clone(),
            pool,
            gt: gt.ok_or_else(|| EvolutionError::GroundTruthMissing(task.id.clone()))?,
        });
    }
    Ok(EvolutionDataset { instances })
}

/// Deterministic train/validation split of `n` indices; validation gets `round(n * val_fraction)`.
pub fn split_indices(n: usize, val_fraction: f64, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_val = ((n as f64) * val_fraction).round() as usize;
    let mut val = idx[..n_val.min(n)].to_vec();
    let mut train = idx[n_val.min(n)..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

/// Draws the experience mask.
pub fn draw_mask(eta: f64, rng: &mut impl Rng) -> bool {
    rng.gen_bool(eta.clamp(0.0, 1.0))
}

/// One policy input: instruction, candidate frames and (when masked) retrieved rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub task_index: usize,
    pub masked: bool,
    /// Pool indices of the frames, in presentation order.
    pub frames: Vec<usize>,
    pub features: Vec<Features>,
    pub rewards: Vec<f64>,
    pub answers: Vec<String>,
    pub retrieved: Vec<String>,
    pub rule_texts: Vec<String>,
}

impl Context {
    /// Position of the ground-truth frame.
    pub fn gt_position(&self, inst: &TaskInstance) -> usize {
        self.frames.iter().position(|&f| f == inst.gt).expect("context holds the ground truth")
    }

    /// Human-readable prompt equivalent of the context.
    pub fn render(&self, inst: &TaskInstance) -> String {
        let mut out = format!("Instruction: {}\n", inst.instruction);
        for (i, &f) in self.frames.iter().enumerate() {
            out.push_str(&format!("Frame {}: {}\n", i + 1, inst.pool[f].scene_text));
        }
        if self.masked {
            if self.rule_texts.is_empty() {
                out.push_str("Experience: <none>\n");
            }
            for r in &self.rule_texts {
                out.push_str(&format!("Experience: {r}\n"));
            }
        }
        out
    }
}

/// Picks the ground-truth frame plus `n_frames - 1` distinct distractors, shuffles them
/// and, when `masked`, fills the experience feature from the top-`k` retrieved rules.
#[allow(clippy::too_many_arguments)]
pub fn build_context(
    inst: &TaskInstance,
    task_index: usize,
    n_frames: usize,
    store: &ExperienceStore,
    masked: bool,
    k: usize,
    mode: RetrievalMode,
    rng: &mut impl Rng,
) -> Result<Context, EvolutionError> {
    if inst.gt >= inst.pool.len() {
        return Err(EvolutionError::GroundTruthMissing(inst.task_id.clone()));
    }
    let others: Vec<usize> = (0..inst.pool.len()).filter(|&i| i != inst.gt).collect();
    let mut frames: Vec<usize> = others
        .choose_multiple(rng, n_frames.saturating_sub(1).min(others.len()))
        .copied()
        .collect();
    frames.push(inst.gt);
    frames.shuffle(rng);

    let mut features: Vec<Features> = frames.iter().map(|&f| inst.pool[f].features).collect();
    let (mut retrieved, mut rule_texts) = (Vec::new(), Vec::new());
    if masked {
        // The candidates are what is being judged, so only the instruction queries the store.
        let ctx = store.retrieve_mode(&inst.instruction, "", k, mode)?;
        for (fi, &f) in frames.iter().enumerate() {
            features[fi][feature::EXPERIENCE_MATCH] =
                super::features::experience_match(&ctx.rules, &inst.pool[f].scene_embedding);
        }
        retrieved = ctx.rules.iter().map(|(r, _)| r.id.clone()).collect();
        rule_texts = ctx.rules.iter().map(|(r, _)| r.full_text.clone()).collect();
    }
    Ok(Context {
        task_index,
        masked,
        rewards: frames.iter().map(|&f| inst.pool[f].reward).collect(),
        answers: frames.iter().map(|&f| inst.pool[f].answer.clone()).collect(),
        frames,
        features,
        retrieved,
        rule_texts,
    })
}
