//! Task and experience synthesis on top of verified trajectories.

mod pipeline;
mod scene;
mod synth;
mod verify;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::gridworld::{Cell, GridError};
use crate::planner::{ObservationTriplet, PlanError, ViewObservation};

pub use pipeline::{
    run_genesis, synthesize_rules, synthesize_task, GenesisConfig, GenesisOutput, RejectionStats, TaskContext,
};
pub use scene::{
    place_objects, relations_between, Relation, RelationConfig, SyntheticScene, Triple, DEFAULT_CATALOG,
};
pub use synth::{
    answer_for, count_word, describe_labels, describe_view, object_function, object_kind, rule_sentence, AnswerFormat, RuleRequest,
    RuleText, SynthOutcome, SynthRequest, SynthesizedTask, TaskCategory, TaskSynthesizer, TemplateSynthesizer,
};
pub use verify::{task_block, task_pattern, verify, Rejection, Verdict};

/// Labels that never count as a meaningful target.
pub const DEFAULT_WALL_LABELS: &[&str] = &["wall", "ceiling", "floor"];

#[derive(Debug, thiserror::Error)]
pub enum GenesisError {
    #[error("object catalog is empty")]
    EmptyCatalog,
    #[error("object density {0} outside (0, 0.2]")]
    InvalidDensity(f64),
    #[error("need {needed} free cells, only {available} available")]
    NotEnoughFreeCells { needed: usize, available: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Experience(#[from] crate::experience::ExperienceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The object a task is about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRef {
    pub object_id: usize,
    pub label: String,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub answer_text: String,
    /// Keypoint whose forward view is the correct choice (always the endpoint).
    pub forward_observation: usize,
    pub target: TargetRef,
    pub format: AnswerFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid_id: String,
    pub master_seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
}

/// Instruction, verified trajectory, ground-truth answer and supporting rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTuple {
    pub id: String,
    pub instruction: String,
    pub category: TaskCategory,
    pub trajectory_id: String,
    /// Observations at the trajectory keypoints, in path order.
    pub keypoints: Vec<ObservationTriplet>,
    pub ground_truth: GroundTruth,
    /// Ids of the rules distilled from this trajectory.
    pub knowledge: Vec<String>,
    pub provenance: Provenance,
}

impl TaskTuple {
    /// The ground-truth forward view, if the index is valid.
    pub fn answer_view(&self) -> Option<&ViewObservation> {
        self.keypoints.get(self.ground_truth.forward_observation).map(|k| &k.forward)
    }

    pub fn start_pose(&self) -> Option<crate::gridworld::Pose> {
        self.keypoints.first().map(|k| k.pose)
    }
}

pub fn write_tasks<W: Write>(mut out: W, tasks: &[TaskTuple]) -> Result<(), GenesisError> {
    for t in tasks {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_tasks<R: BufRead>(input: R) -> Result<Vec<TaskTuple>, GenesisError> {
    let mut tasks = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            tasks.push(serde_json::from_str(&line)?);
        }
    }
    Ok(tasks)
}
