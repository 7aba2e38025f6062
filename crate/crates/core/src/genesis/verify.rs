//! Multi-stage rejection of malformed task candidates.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::experience::{rule_pattern, ExperienceRule};

use super::TaskTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rejection {
    EndpointUnreachable,
    TrajectoryTooLong,
    TrajectoryTooShort,
    NoVisibleTarget,
    WallOnlyTarget,
    SynthesizerRefused,
    TaskTemplateViolation,
    RuleTemplateViolation,
}

impl Rejection {
    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::EndpointUnreachable => "EndpointUnreachable",
            Rejection::TrajectoryTooLong => "TrajectoryTooLong",
            Rejection::TrajectoryTooShort => "TrajectoryTooShort",
            Rejection::NoVisibleTarget => "NoVisibleTarget",
            Rejection::WallOnlyTarget => "WallOnlyTarget",
            Rejection::SynthesizerRefused => "SynthesizerRefused",
            Rejection::TaskTemplateViolation => "TaskTemplateViolation",
            Rejection::RuleTemplateViolation => "RuleTemplateViolation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(Rejection),
}

/// Canonical three-line block the task pattern is checked against.
pub fn task_block(task: &TaskTuple) -> String {
    format!(
        "Task: {}\nQuestion: {}\nAnswer: {}",
        task.category, task.instruction, task.ground_truth.answer_text
    )
}

pub fn task_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^Task: (ObjectRecognition|ObjectLocalization|AttributeRecognition|ObjectStateRecognition|Counting|WorldKnowledge|SpatialUnderstanding|FunctionalReasoning)\nQuestion: [^\n]*\S[^\n]*\?\nAnswer: [^\n]*\S[^\n]*$",
        )
        .expect("valid task regex")
    })
}

/// Checks, in order: a meaningful target in the endpoint forward view, the task block,
/// then every rule. The first failure decides the verdict.
pub fn verify(task: &TaskTuple, rules: &[ExperienceRule], wall_labels: &[String]) -> Verdict {
    let Some(view) = task.answer_view() else {
        return Verdict::Rejected(Rejection::NoVisibleTarget);
    };
    if view.objects.is_empty() {
        return Verdict::Rejected(Rejection::NoVisibleTarget);
    }
    if view.objects.iter().all(|o| wall_labels.contains(&o.label)) {
        return Verdict::Rejected(Rejection::WallOnlyTarget);
    }
    if !task_pattern().is_match(&task_block(task)) {
        return Verdict::Rejected(Rejection::TaskTemplateViolation);
    }
    if rules.iter().any(|r| !rule_pattern().is_match(&r.full_text)) {
        return Verdict::Rejected(Rejection::RuleTemplateViolation);
    }
    Verdict::Accepted
}
