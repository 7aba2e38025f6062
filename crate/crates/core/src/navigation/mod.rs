//! Frontier/memory navigation episodes driven by a pluggable decision policy.

mod buffers;
mod episode;
mod policies;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::experience::ExperienceError;
use crate::gridworld::{visible_cells, Cell, CellState, OccupancyGrid, Pose, SensorConfig, VIEW_OFFSETS};
use crate::genesis::{describe_labels, SyntheticScene};
use crate::planner::PlanError;

pub use buffers::{frontier_cells, frontier_clusters, FrontierBuffer, FrontierNode, MemoryBuffer, MemoryEntry};
pub use episode::{
    build_candidates, prefilter_score, run_episode, write_episodes, read_episodes, Action, ActionKind, Candidate, EpisodeOutcome,
    EpisodeResult, StepRecord,
};
pub use policies::{
    FirstFrontierPolicy, LinearNavPolicy, NavPolicy, OraclePolicy, PolicyKind, UniformRandomPolicy,
};

#[derive(Debug, thiserror::Error)]
pub enum NavError {
    #[error("pose ({x:.2}, {y:.2}) is not on a free cell")]
    PoseInObstacle { x: f64, y: f64 },
    #[error("no frontier or memory candidate to choose from")]
    EmptyActionSpace,
    #[error("policy chose candidate {0}, which does not exist")]
    BadChoice(usize),
    #[error("task has no keypoints")]
    NoStart,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Experience(#[from] ExperienceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which experience the agent is shown during an episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperienceMode {
    #[default]
    Matched,
    /// Rules for a similar task taken from a divergent scene.
    Mismatched,
    None,
    /// `k` rules drawn uniformly from the store.
    Random,
}

impl FromStr for ExperienceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matched" => Ok(Self::Matched),
            "mismatched" => Ok(Self::Mismatched),
            "none" => Ok(Self::None),
            "random" => Ok(Self::Random),
            _ => Err(format!("expected matched|mismatched|none|random, got {s:?}")),
        }
    }
}

impl fmt::Display for ExperienceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Matched => "matched",
            Self::Mismatched => "mismatched",
            Self::None => "none",
            Self::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub t_max: usize,
    /// Per-decision travel cap toward a frontier (meters).
    pub delta_max: f64,
    /// Arrival radius for frontier moves (meters).
    pub proximity: f64,
    /// Stand-off distance when walking up to a remembered object (meters).
    pub memory_proximity: f64,
    /// Goal-reaching success radius around the target (meters).
    pub success_radius: f64,
    /// Radius around the agent marked explored every step (meters).
    pub reveal_radius: f64,
    /// Views taken on the first step; later steps use the three fixed views.
    pub initial_views: usize,
    /// Memory entries become candidates only when some descriptor term's cosine with the
    /// query exceeds this.
    pub prefilter: f64,
    /// Distance (meters) that maps to a travel-cost feature of -1.
    pub travel_scale: f64,
    pub sensor: SensorConfig,
    pub experience: ExperienceMode,
    pub retrieval_k: usize,
    pub seed: u64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            t_max: 50,
            delta_max: crate::planner::DEFAULT_DELTA_MAX,
            proximity: crate::planner::DEFAULT_PROXIMITY,
            memory_proximity: 0.75,
            success_radius: 1.0,
            reveal_radius: 0.7,
            initial_views: 7,
            prefilter: 0.1,
            travel_scale: 4.0,
            sensor: SensorConfig::default(),
            experience: ExperienceMode::Matched,
            retrieval_k: crate::experience::DEFAULT_K,
            seed: 1,
        }
    }
}

/// What the agent knows mid-episode.
#[derive(Debug, Clone, PartialEq)]
pub struct NavigationState {
    pub query: String,
    pub memory: MemoryBuffer,
    pub frontiers: FrontierBuffer,
    pub pose: Pose,
    /// Explored map; unexplored cells are Unknown.
    pub explored: OccupancyGrid,
    pub step: usize,
    /// Meters traveled so far.
    pub path: f64,
    /// Cells seen during the first perception, used by the novelty feature.
    pub initial_seen: BTreeSet<Cell>,
}

impl NavigationState {
    pub fn new(query: &str, truth: &OccupancyGrid, pose: Pose) -> Self {
        let explored = OccupancyGrid::new(truth.width(), truth.height(), truth.resolution(), CellState::Unknown)
            .expect("dimensions come from a valid grid");
        Self {
            query: query.to_string(),
            memory: MemoryBuffer::default(),
            frontiers: FrontierBuffer::default(),
            pose,
            explored,
            step: 0,
            path: 0.0,
            initial_seen: BTreeSet::new(),
        }
    }
}

/// Headings observed at `step`: an even panorama first, then forward/left/right.
pub fn view_headings(theta: f64, step: usize, initial_views: usize) -> Vec<f64> {
    if step == 0 {
        let n = initial_views.max(1);
        (0..n).map(|i| theta + 2.0 * PI * i as f64 / n as f64).collect()
    } else {
        VIEW_OFFSETS.iter().map(|o| theta + o).collect()
    }
}

/// Senses the true world from the current pose: reveals visible cells and the cells
/// within the reveal radius, records newly seen objects and recomputes frontiers.
pub fn perceive(
    state: &mut NavigationState,
    truth: &OccupancyGrid,
    scene: &SyntheticScene,
    cfg: &NavConfig,
) -> Result<(), NavError> {
    let pose = state.pose;
    let here = truth
        .cell_at(pose.x, pose.y)
        .filter(|&c| truth.get(c) == CellState::Free)
        .ok_or(NavError::PoseInObstacle { x: pose.x, y: pose.y })?;

    let mut seen = BTreeSet::new();
    for h in view_headings(pose.theta, state.step, cfg.initial_views) {
        seen.extend(visible_cells(truth, pose.with_heading(h), cfg.sensor.hfov, cfg.sensor.range));
    }
    let objects_seen: BTreeSet<Cell> = seen.clone();
    let r = (cfg.reveal_radius / truth.resolution()).floor() as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (here.x as i64 + dx, here.y as i64 + dy);
            if truth.contains(x, y) {
                let c = Cell::new(x as usize, y as usize);
                let (cx, cy) = truth.center(c);
                if pose.distance_to(cx, cy) <= cfg.reveal_radius {
                    seen.insert(c);
                }
            }
        }
    }
    for &c in &seen {
        state.explored.set(c, truth.get(c));
    }
    if state.step == 0 {
        state.initial_seen = seen.clone();
    }
    let mut objects: Vec<_> = scene.objects.iter().filter(|o| objects_seen.contains(&o.cell)).collect();
    objects.sort_by_key(|o| o.id);
    for o in objects {
        state.memory.insert(MemoryEntry {
            object_id: o.id,
            label: o.label.clone(),
            cell: o.cell,
            first_seen: state.step,
            descriptor: crate::evolution::features::object_descriptor(o),
        });
    }
    let mut nodes: Vec<FrontierNode> = frontier_clusters(&state.explored).into_iter().map(|(n, _)| n).collect();
    for n in &mut nodes {
        n.descriptor = describe_labels(&episode::nearby_labels(&state.memory, &state.explored, n.cell, cfg.sensor.range));
    }
    state.frontiers = FrontierBuffer { nodes };
    Ok(())
}
