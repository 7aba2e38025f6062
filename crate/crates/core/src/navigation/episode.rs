use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::features::{experience_match, heading_alignment, object_count, MATCH_DIMENSION};
use crate::evolution::{feature, Features, FEATURE_DIM};
use crate::experience::{cosine, embed_with, tokenize, ExperienceRule, ExperienceStore, RetrievalMode};
use crate::genesis::{answer_for, describe_labels, SyntheticScene, TaskTuple};
use crate::gridworld::{Cell, CellState, OccupancyGrid, Pose, SceneObject};
use crate::metrics::{reference_judge, EvalRecord, JudgeScore};
use crate::planner::{astar_cells, follow, geodesic_costs};
use crate::seed::derive_seed;

use super::{perceive, ExperienceMode, MemoryBuffer, NavConfig, NavError, NavPolicy, NavigationState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Frontier,
    Memory,
}

/// A scored option in the action space: frontiers first, then memory entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub kind: ActionKind,
    /// Index into the frontier or memory buffer.
    pub index: usize,
    pub cell: Cell,
    pub object_id: Option<usize>,
    pub features: Features,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub target: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeOutcome {
    AnsweredFromMemory,
    ReachedTarget,
    StepBudgetExhausted,
    InvalidDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub pose: Pose,
    pub action: Action,
    pub retrieved: Vec<String>,
    pub traveled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: String,
    pub task_id: String,
    pub category: String,
    pub outcome: EpisodeOutcome,
    pub answer: Option<String>,
    /// Judge score of the answer, for question-answering tasks.
    pub judge: Option<JudgeScore>,
    /// Goal tasks: ended within the success radius of the target. Question tasks:
    /// answered from the target object's memory entry.
    pub success: bool,
    pub steps: usize,
    pub path: f64,
    pub shortest: f64,
    pub error: Option<String>,
    pub trace: Vec<StepRecord>,
}

impl EpisodeResult {
    pub fn eval_record(&self) -> EvalRecord {
        let qa = self.judge.is_some();
        let failed = if qa {
            self.outcome != EpisodeOutcome::AnsweredFromMemory
        } else {
            !self.success
        };
        EvalRecord {
            episode_id: self.episode_id.clone(),
            category: self.category.clone(),
            judge: self.judge,
            success: self.success,
            shortest: self.shortest,
            path: self.path,
            failure: failed,
        }
    }
}

pub fn write_episodes<W: Write>(mut out: W, episodes: &[EpisodeResult]) -> Result<(), NavError> {
    for e in episodes {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_episodes<R: BufRead>(input: R) -> Result<Vec<EpisodeResult>, NavError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

fn free_mask(map: &OccupancyGrid) -> Vec<bool> {
    map.states().iter().map(|&s| s == CellState::Free).collect()
}

fn within(map: &OccupancyGrid, a: Cell, b: Cell, radius: f64) -> bool {
    let (ax, ay) = map.center(a);
    let (bx, by) = map.center(b);
    (ax - bx).hypot(ay - by) <= radius
}

/// Labels of remembered objects within `radius` meters of `cell`.
pub(crate) fn nearby_labels<'a>(memory: &'a MemoryBuffer, map: &OccupancyGrid, cell: Cell, radius: f64) -> Vec<&'a str> {
    memory
        .entries
        .iter()
        .filter(|e| within(map, e.cell, cell, radius))
        .map(|e| e.label.as_str())
        .collect()
}

fn novelty(state: &NavigationState, cell: Cell, radius: f64) -> f64 {
    let map = &state.explored;
    let r = (radius / map.resolution()).ceil() as i64;
    let (mut total, mut fresh) = (0usize, 0usize);
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (cell.x as i64 + dx, cell.y as i64 + dy);
            if !map.contains(x, y) {
                continue;
            }
            let c = Cell::new(x as usize, y as usize);
            if within(map, c, cell, radius) {
                total += 1;
                fresh += (!state.initial_seen.contains(&c)) as usize;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        fresh as f64 / total as f64
    }
}

/// Best cosine between the query and any single descriptor term (label, kind, color, ...).
pub fn prefilter_score(query: &[f64], descriptor: &str) -> Result<f64, NavError> {
    let mut best = 0.0f64;
    for term in tokenize(descriptor) {
        best = best.max(cosine(query, &embed_with(&term, query.len())?));
    }
    Ok(best)
}

/// Scores every reachable frontier and every pre-filtered memory entry.
pub fn build_candidates(
    state: &NavigationState,
    rules: &[(ExperienceRule, f64)],
    cfg: &NavConfig,
) -> Result<Vec<Candidate>, NavError> {
    let map = &state.explored;
    let here = map
        .cell_at(state.pose.x, state.pose.y)
        .ok_or(NavError::PoseInObstacle { x: state.pose.x, y: state.pose.y })?;
    let dist = geodesic_costs(map, &free_mask(map), here);
    let query = embed_with(&state.query, MATCH_DIMENSION)?;
    let range = cfg.sensor.range;

    let features = |cell: Cell, scene_text: &str, is_memory: bool, query_match: f64| -> Result<Features, NavError> {
        let mut f = [0.0; FEATURE_DIM];
        f[feature::TRAVEL_COST] = dist[map.index(cell)]
            .map_or(-2.0, |d| (-d.meters(map.resolution()) / cfg.travel_scale).max(-2.0));
        f[feature::NOVELTY] = novelty(state, cell, range);
        if !rules.is_empty() {
            f[feature::EXPERIENCE_MATCH] = experience_match(rules, &embed_with(scene_text, MATCH_DIMENSION)?);
        }
        f[feature::HEADING_ALIGNMENT] = if cell == here {
            1.0
        } else {
            let (cx, cy) = map.center(cell);
            heading_alignment((cy - state.pose.y).atan2(cx - state.pose.x), state.pose.theta)
        };
        f[feature::IS_MEMORY] = if is_memory { 1.0 } else { 0.0 };
        f[feature::QUERY_MATCH] = query_match;
        f[feature::OBJECT_COUNT] = object_count(nearby_labels(&state.memory, map, cell, range).len());
        f[feature::BIAS] = 1.0;
        Ok(f)
    };

    let mut out = Vec::new();
    for (i, node) in state.frontiers.nodes.iter().enumerate() {
        if dist[map.index(node.cell)].is_none() {
            continue;
        }
        out.push(Candidate {
            kind: ActionKind::Frontier,
            index: i,
            cell: node.cell,
            object_id: None,
            features: features(node.cell, &node.descriptor, false, 0.0)?,
        });
    }
    for (i, e) in state.memory.entries.iter().enumerate() {
        if prefilter_score(&query, &e.descriptor)? <= cfg.prefilter {
            continue;
        }
        let q = cosine(&query, &embed_with(&e.descriptor, MATCH_DIMENSION)?);
        out.push(Candidate {
            kind: ActionKind::Memory,
            index: i,
            cell: e.cell,
            object_id: Some(e.object_id),
            features: features(e.cell, &describe_labels(&[e.label.as_str()]), true, q)?,
        });
    }
    Ok(out)
}

fn retrieve(
    store: &ExperienceStore,
    state: &NavigationState,
    cfg: &NavConfig,
    episode_seed: u64,
) -> Result<Vec<(ExperienceRule, f64)>, NavError> {
    let k = cfg.retrieval_k;
    Ok(match cfg.experience {
        ExperienceMode::None => Vec::new(),
        // The query is the instruction alone, exactly as during training.
        ExperienceMode::Matched => store.retrieve_mode(&state.query, "", k, RetrievalMode::Matched)?.rules,
        ExperienceMode::Mismatched => {
            let labels: Vec<&str> = state.memory.entries.iter().map(|e| e.label.as_str()).collect();
            store
                .retrieve_mode(&state.query, &describe_labels(&labels), k, RetrievalMode::Mismatched)?
                .rules
        }
        ExperienceMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(episode_seed);
            store
                .rules()
                .choose_multiple(&mut rng, k.min(store.len()))
                .map(|r| (r.clone(), 0.0))
                .collect()
        }
    })
}

/// Answer from a remembered object and what is remembered around it.
fn answer_from_memory(task: &TaskTuple, scene: &SyntheticScene, state: &NavigationState, object: &SceneObject, range: f64) -> String {
    let around: Vec<&SceneObject> = state
        .memory
        .entries
        .iter()
        .filter(|e| within(&state.explored, e.cell, object.cell, range))
        .filter_map(|e| scene.object(e.object_id))
        .collect();
    let ids: BTreeSet<usize> = around.iter().map(|o| o.id).collect();
    let triples: Vec<_> = scene
        .scene_graph
        .iter()
        .filter(|t| ids.contains(&t.subject) && ids.contains(&t.object))
        .copied()
        .collect();
    answer_for(task.category, object, &around, &triples)
}

/// Walks up to a remembered object, stopping at the first path cell within the stand-off distance.
fn approach(state: &NavigationState, object_cell: Cell, cfg: &NavConfig) -> Result<crate::planner::FollowResult, NavError> {
    let map = &state.explored;
    let here = map
        .cell_at(state.pose.x, state.pose.y)
        .ok_or(NavError::PoseInObstacle { x: state.pose.x, y: state.pose.y })?;
    let passable = free_mask(map);
    let dist = geodesic_costs(map, &passable, here);
    let (ox, oy) = map.center(object_cell);
    let goal = map
        .cells()
        .filter(|&c| dist[map.index(c)].is_some())
        .min_by(|&a, &b| {
            let da = state_dist(map, a, ox, oy);
            let db = state_dist(map, b, ox, oy);
            da.total_cmp(&db).then(map.index(a).cmp(&map.index(b)))
        })
        .unwrap_or(here);
    let path = astar_cells(map, &passable, here, goal).unwrap_or_else(|| vec![here]);
    let stop = path
        .iter()
        .copied()
        .find(|&c| state_dist(map, c, ox, oy) <= cfg.memory_proximity)
        .unwrap_or(goal);
    Ok(follow(map, state.pose, stop, f64::INFINITY, cfg.memory_proximity)?)
}

fn state_dist(map: &OccupancyGrid, c: Cell, x: f64, y: f64) -> f64 {
    let (cx, cy) = map.center(c);
    (cx - x).hypot(cy - y)
}

/// Runs one episode of perceive → choose → act until an answer, arrival, an invalid
/// decision or the step budget ends it.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    episode_id: &str,
    task: &TaskTuple,
    truth: &OccupancyGrid,
    scene: &SyntheticScene,
    policy: &mut dyn NavPolicy,
    store: &ExperienceStore,
    cfg: &NavConfig,
    episode_index: u64,
) -> Result<EpisodeResult, NavError> {
    let start = task.start_pose().ok_or(NavError::NoStart)?;
    let target = &task.ground_truth.target;
    let qa = !task.category.is_goal_reaching();
    let start_cell = truth
        .cell_at(start.x, start.y)
        .ok_or(NavError::PoseInObstacle { x: start.x, y: start.y })?;
    let shortest = geodesic_costs(truth, &free_mask(truth), start_cell)[truth.index(target.cell)]
        .map_or(f64::NAN, |c| c.meters(truth.resolution()))
        .max(truth.resolution());
    let (tx, ty) = truth.center(target.cell);

    let mut state = NavigationState::new(&task.instruction, truth, start);
    let mut result = EpisodeResult {
        episode_id: episode_id.to_string(),
        task_id: task.id.clone(),
        category: task.category.to_string(),
        outcome: EpisodeOutcome::StepBudgetExhausted,
        answer: None,
        judge: qa.then(|| reference_judge("", &task.ground_truth.answer_text)),
        success: false,
        steps: cfg.t_max,
        path: 0.0,
        shortest,
        error: None,
        trace: Vec::new(),
    };
    let invalid = |mut r: EpisodeResult, t: usize, e: Option<NavError>| {
        r.outcome = EpisodeOutcome::InvalidDecision;
        r.steps = t;
        r.error = e.map(|e| e.to_string());
        r
    };

    let mut rules = None;
    for t in 0..cfg.t_max {
        state.step = t;
        if let Err(e) = perceive(&mut state, truth, scene, cfg) {
            return Ok(invalid(result, t, Some(e)));
        }
        let rules = match &rules {
            Some(r) => r,
            None => rules.insert(retrieve(store, &state, cfg, derive_seed(cfg.seed, &[episode_index]))?),
        };
        let candidates = match build_candidates(&state, rules, cfg) {
            Ok(c) if !c.is_empty() => c,
            Ok(_) => return Ok(invalid(result, t + 1, Some(NavError::EmptyActionSpace))),
            Err(e) => return Ok(invalid(result, t + 1, Some(e))),
        };
        let Some(choice) = policy.choose(&state, &candidates) else {
            return Ok(invalid(result, t + 1, Some(NavError::EmptyActionSpace)));
        };
        let Some(cand) = candidates.get(choice) else {
            return Ok(invalid(result, t + 1, Some(NavError::BadChoice(choice))));
        };
        let mut record = StepRecord {
            t,
            pose: state.pose,
            action: Action {
                kind: cand.kind,
                target: cand.cell,
            },
            retrieved: rules.iter().map(|(r, _)| r.id.clone()).collect(),
            traveled: 0.0,
        };

        match cand.kind {
            ActionKind::Memory => {
                let object = cand.object_id.and_then(|id| scene.object(id));
                let is_target = cand.object_id == Some(target.object_id);
                result.steps = t + 1;
                if qa {
                    let answer = object
                        .map(|o| answer_from_memory(task, scene, &state, o, cfg.sensor.range))
                        .unwrap_or_default();
                    result.judge = Some(reference_judge(&answer, &task.ground_truth.answer_text));
                    result.answer = Some(answer);
                    result.outcome = EpisodeOutcome::AnsweredFromMemory;
                    result.success = is_target;
                } else {
                    match approach(&state, cand.cell, cfg) {
                        Ok(moved) => {
                            record.traveled = moved.traveled;
                            state.path += moved.traveled;
                            state.pose = moved.pose;
                        }
                        Err(e) => {
                            result.trace.push(record);
                            result.path = state.path;
                            return Ok(invalid(result, t + 1, Some(e)));
                        }
                    }
                    result.outcome = EpisodeOutcome::ReachedTarget;
                    result.success = state.pose.distance_to(tx, ty) <= cfg.success_radius;
                }
                result.trace.push(record);
                result.path = state.path;
                return Ok(result);
            }
            ActionKind::Frontier => match follow(&state.explored, state.pose, cand.cell, cfg.delta_max, cfg.proximity) {
                Ok(moved) => {
                    record.traveled = moved.traveled;
                    state.path += moved.traveled;
                    state.pose = moved.pose;
                    result.trace.push(record);
                }
                Err(e) => {
                    result.trace.push(record);
                    result.path = state.path;
                    return Ok(invalid(result, t + 1, Some(e.into())));
                }
            },
        }
    }
    result.path = state.path;
    Ok(result)
}
