use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::LinearPolicy;
use crate::genesis::TaskTuple;
use crate::gridworld::{CellState, OccupancyGrid};
use crate::planner::{geodesic_costs, OctileCost};

use super::{ActionKind, Candidate, NavigationState};

/// Chooses one candidate index per decision, or `None` to give up.
pub trait NavPolicy {
    fn choose(&mut self, state: &NavigationState, candidates: &[Candidate]) -> Option<usize>;
}

/// Argmax of a linear scorer; ties go to the earliest candidate, so frontiers win over memory.
#[derive(Debug, Clone)]
pub struct LinearNavPolicy(pub LinearPolicy);

impl NavPolicy for LinearNavPolicy {
    fn choose(&mut self, _: &NavigationState, candidates: &[Candidate]) -> Option<usize> {
        let feats: Vec<_> = candidates.iter().map(|c| c.features).collect();
        self.0.argmax(&feats)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFrontierPolicy;

impl NavPolicy for FirstFrontierPolicy {
    fn choose(&mut self, _: &NavigationState, candidates: &[Candidate]) -> Option<usize> {
        (!candidates.is_empty()).then_some(0)
    }
}

/// Uniform over the candidates.
#[derive(Debug, Clone)]
pub struct UniformRandomPolicy(ChaCha8Rng);

impl UniformRandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl NavPolicy for UniformRandomPolicy {
    fn choose(&mut self, _: &NavigationState, candidates: &[Candidate]) -> Option<usize> {
        (!candidates.is_empty()).then(|| self.0.gen_range(0..candidates.len()))
    }
}

/// Privileged policy: takes the target's memory entry once it is remembered, otherwise
/// the frontier closest to the target by true geodesic distance.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    target_object: usize,
    resolution: f64,
    width: usize,
    to_target: Vec<Option<OctileCost>>,
}

impl OraclePolicy {
    pub fn new(truth: &OccupancyGrid, task: &TaskTuple) -> Self {
        let passable: Vec<bool> = truth.states().iter().map(|&s| s == CellState::Free).collect();
        Self {
            target_object: task.ground_truth.target.object_id,
            resolution: truth.resolution(),
            width: truth.width(),
            to_target: geodesic_costs(truth, &passable, task.ground_truth.target.cell),
        }
    }
}

impl NavPolicy for OraclePolicy {
    fn choose(&mut self, _: &NavigationState, candidates: &[Candidate]) -> Option<usize> {
        if let Some(i) = candidates.iter().position(|c| c.object_id == Some(self.target_object)) {
            return Some(i);
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in candidates.iter().enumerate() {
            if c.kind != ActionKind::Frontier {
                continue;
            }
            let d = self.to_target[c.cell.y * self.width + c.cell.x]
                .map_or(f64::INFINITY, |d| d.meters(self.resolution));
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i).or((!candidates.is_empty()).then_some(0))
    }
}

/// Serializable policy choice for command-line runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    Linear { policy: LinearPolicy },
    Oracle,
    Random,
    FirstFrontier,
}

impl PolicyKind {
    /// Builds the per-episode policy; `seed` drives the random policy only.
    pub fn instantiate(&self, truth: &OccupancyGrid, task: &TaskTuple, seed: u64) -> Box<dyn NavPolicy> {
        match self {
            PolicyKind::Linear { policy } => Box::new(LinearNavPolicy(policy.clone())),
            PolicyKind::Oracle => Box::new(OraclePolicy::new(truth, task)),
            PolicyKind::Random => Box::new(UniformRandomPolicy::new(seed)),
            PolicyKind::FirstFrontier => Box::new(FirstFrontierPolicy),
        }
    }
}
