//! Task and rule synthesis behind a pluggable interface, with a template reference.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::SceneObject;
use crate::planner::ViewObservation;

use super::scene::{Relation, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskCategory {
    ObjectRecognition,
    ObjectLocalization,
    AttributeRecognition,
    ObjectStateRecognition,
    Counting,
    WorldKnowledge,
    SpatialUnderstanding,
    FunctionalReasoning,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 8] = [
        TaskCategory::ObjectRecognition,
        TaskCategory::ObjectLocalization,
        TaskCategory::AttributeRecognition,
        TaskCategory::ObjectStateRecognition,
        TaskCategory::Counting,
        TaskCategory::WorldKnowledge,
        TaskCategory::SpatialUnderstanding,
        TaskCategory::FunctionalReasoning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskCategory::ObjectRecognition => "ObjectRecognition",
            TaskCategory::ObjectLocalization => "ObjectLocalization",
            TaskCategory::AttributeRecognition => "AttributeRecognition",
            TaskCategory::ObjectStateRecognition => "ObjectStateRecognition",
            TaskCategory::Counting => "Counting",
            TaskCategory::WorldKnowledge => "WorldKnowledge",
            TaskCategory::SpatialUnderstanding => "SpatialUnderstanding",
            TaskCategory::FunctionalReasoning => "FunctionalReasoning",
        }
    }

    /// Goal-reaching tasks end by walking to the target; the rest are answered from memory.
    pub fn is_goal_reaching(self) -> bool {
        self == TaskCategory::ObjectLocalization
    }
}

impl fmt::Display for TaskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown task category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnswerFormat {
    OpenEnded,
    MultipleChoice { options: Vec<String>, correct: usize },
}

/// Inputs handed to a synthesizer for one task.
#[derive(Debug, Clone)]
pub struct SynthRequest<'a> {
    pub category: TaskCategory,
    pub forward: &'a ViewObservation,
    /// Non-wall objects in the forward view, in id order.
    pub visible: Vec<&'a SceneObject>,
    /// Scene-graph triples among `visible`.
    pub triples: Vec<Triple>,
    /// Label vocabulary for multiple-choice distractors.
    pub catalog: &'a [String],
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesizedTask {
    pub question: String,
    pub answer: String,
    pub target_object: usize,
    pub format: AnswerFormat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthOutcome {
    Task(SynthesizedTask),
    Refuse(String),
}

/// Inputs for one experience rule.
#[derive(Debug, Clone)]
pub struct RuleRequest<'a> {
    pub category: TaskCategory,
    pub instruction: &'a str,
    pub forward: &'a ViewObservation,
    pub step: usize,
    /// Label of the object the task is about, known at synthesis time.
    pub target_label: Option<&'a str>,
}

/// Rule text pieces: the task clause, the scene clause and the assembled sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleText {
    pub task_text: String,
    pub scene_text: String,
    pub full_text: String,
}

/// Produces questions, answers and rules. Implementations must be deterministic for
/// fixed inputs and seed.
pub trait TaskSynthesizer {
    fn synthesize(&self, request: &SynthRequest<'_>) -> SynthOutcome;

    /// `None` means the synthesizer declined; the rule is skipped.
    fn rule(&self, request: &RuleRequest<'_>) -> Option<RuleText>;
}

/// Deterministic template synthesizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateSynthesizer {
    /// Probability of emitting a multiple-choice answer for label-valued categories.
    pub multiple_choice_rate: f64,
}

impl TemplateSynthesizer {
    pub fn new() -> Self {
        Self {
            multiple_choice_rate: 0.25,
        }
    }
}

/// Assembles the canonical IF-AND-THEN sentence.
pub fn rule_sentence(category: TaskCategory, task_text: &str, scene_text: &str) -> String {
    let verb = if category.is_goal_reaching() { "searching" } else { "answering" };
    format!("IF {verb} {task_text} AND observing {scene_text} THEN prioritize this path.")
}

/// Describes the objects of a view by label, e.g. `chair (2), lamp`.
pub fn describe_view(view: &ViewObservation) -> String {
    describe_labels(&view.labels())
}

/// Label list with multiplicities, sorted; `open floor` when empty.
pub fn describe_labels(labels: &[&str]) -> String {
    if labels.is_empty() {
        return "open floor".to_string();
    }
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for &l in labels {
        match counts.iter_mut().find(|(k, _)| *k == l) {
            Some((_, n)) => *n += 1,
            None => counts.push((l, 1)),
        }
    }
    counts.sort();
    let parts: Vec<String> = counts
        .into_iter()
        .map(|(l, n)| if n == 1 { l.to_string() } else { format!("{l} ({n})") })
        .collect();
    parts.join(", ")
}

pub fn count_word(n: usize) -> String {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

pub fn object_kind(label: &str) -> &'static str {
    match label {
        "chair" | "sofa" | "table" | "bed" | "bench" | "desk" | "bookshelf" | "cabinet" => "furniture",
        "tv" | "refrigerator" | "microwave" | "lamp" => "appliance",
        "sink" | "toilet" => "fixture",
        "piano" => "instrument",
        "plant" => "decoration",
        _ => "object",
    }
}

pub fn object_function(label: &str) -> String {
    match label {
        "chair" => "sit down for a moment".into(),
        "sofa" => "relax with a book".into(),
        "table" => "put down a cup".into(),
        "bed" => "take a nap".into(),
        "lamp" => "get more light to read".into(),
        "plant" => "water something green".into(),
        "tv" => "watch the news".into(),
        "cabinet" => "store some dishes".into(),
        "piano" => "play some music".into(),
        "bench" => "rest my legs".into(),
        "sink" => "wash my hands".into(),
        "refrigerator" => "get a cold drink".into(),
        "desk" => "write a letter".into(),
        "bookshelf" => "find a novel".into(),
        "microwave" => "heat up leftovers".into(),
        "toilet" => "use the restroom".into(),
        other => format!("use the {other}"),
    }
}

/// Answer text for `category` about `target`, given what else is in view.
///
/// Shared by the synthesizer (ground truth) and the reference answerer in navigation.
pub fn answer_for(
    category: TaskCategory,
    target: &SceneObject,
    visible: &[&SceneObject],
    triples: &[Triple],
) -> String {
    let color = target.attribute("color").unwrap_or("plain");
    match category {
        TaskCategory::ObjectRecognition | TaskCategory::WorldKnowledge | TaskCategory::FunctionalReasoning => {
            target.label.clone()
        }
        TaskCategory::ObjectLocalization => match anchor_relation(target, visible, triples) {
            Some((rel, other)) => format!("The {} is {} the {}.", target.label, rel.phrase(), other.label),
            None => format!("The {} is at the end of the path.", target.label),
        },
        TaskCategory::AttributeRecognition => color.to_string(),
        TaskCategory::ObjectStateRecognition => target.attribute("state").unwrap_or("unknown").to_string(),
        TaskCategory::Counting => count_word(visible.iter().filter(|o| o.label == target.label).count()),
        TaskCategory::SpatialUnderstanding => match spatial_pair(target, visible, triples) {
            Some((rel, other)) => format!("The {} is {} the {}.", target.label, rel.phrase(), other.label),
            None => format!("The {} stands alone.", target.label),
        },
    }
}

fn anchor_relation<'a>(
    target: &SceneObject,
    visible: &[&'a SceneObject],
    triples: &[Triple],
) -> Option<(Relation, &'a SceneObject)> {
    triples
        .iter()
        .filter(|t| t.subject == target.id && t.relation == Relation::Near)
        .find_map(|t| visible.iter().find(|o| o.id == t.object).map(|o| (t.relation, *o)))
}

fn spatial_pair<'a>(
    target: &SceneObject,
    visible: &[&'a SceneObject],
    triples: &[Triple],
) -> Option<(Relation, &'a SceneObject)> {
    const DIRECTIONAL: [Relation; 4] = [Relation::LeftOf, Relation::RightOf, Relation::Above, Relation::Below];
    triples
        .iter()
        .filter(|t| t.subject == target.id && DIRECTIONAL.contains(&t.relation))
        .find_map(|t| {
            visible
                .iter()
                .find(|o| o.id == t.object && o.label != target.label)
                .map(|o| (t.relation, *o))
        })
}

impl TaskSynthesizer for TemplateSynthesizer {
    fn synthesize(&self, req: &SynthRequest<'_>) -> SynthOutcome {
        if req.visible.is_empty() {
            return SynthOutcome::Refuse("no visible target".into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        let mut pool: Vec<&SceneObject> = req.visible.clone();
        if req.category == TaskCategory::SpatialUnderstanding {
            pool.retain(|o| spatial_pair(o, &req.visible, &req.triples).is_some());
            if pool.is_empty() {
                return SynthOutcome::Refuse("no directional pair in view".into());
            }
        }
        let target = *pool.choose(&mut rng).expect("pool is not empty");
        let color = target.attribute("color").unwrap_or("plain");
        let material = target.attribute("material").unwrap_or("");
        let label = target.label.as_str();

        let question = match req.category {
            TaskCategory::ObjectRecognition => match anchor_relation(target, &req.visible, &req.triples) {
                Some((_, other)) => format!("What is the {color} {material} object near the {}?", other.label),
                None => format!("What is the {color} {material} object near the end of this path?"),
            },
            TaskCategory::ObjectLocalization => format!("Where is the {label} located?"),
            TaskCategory::AttributeRecognition => format!("What color is the {material} {label}?"),
            TaskCategory::ObjectStateRecognition => format!("What state is the {color} {label} in?"),
            TaskCategory::Counting => format!("How many {label} objects are visible here?"),
            TaskCategory::WorldKnowledge => {
                format!("What type of {} is visible at the end of this path?", object_kind(label))
            }
            TaskCategory::SpatialUnderstanding => {
                let (_, other) = spatial_pair(target, &req.visible, &req.triples).expect("filtered above");
                format!("What is the relative position of the {label} and the {}?", other.label)
            }
            TaskCategory::FunctionalReasoning => {
                format!("I want to {}, which object should I go to?", object_function(label))
            }
        };
        let answer = answer_for(req.category, target, &req.visible, &req.triples);

        let label_valued = matches!(
            req.category,
            TaskCategory::ObjectRecognition | TaskCategory::WorldKnowledge | TaskCategory::FunctionalReasoning
        );
        let format = if label_valued && rng.gen_bool(self.multiple_choice_rate.clamp(0.0, 1.0)) {
            let mut distractors: Vec<&String> = req.catalog.iter().filter(|l| l.as_str() != label).collect();
            distractors.sort();
            distractors.dedup();
            if distractors.len() >= 3 {
                let mut options: Vec<String> = distractors
                    .choose_multiple(&mut rng, 3)
                    .map(|l| l.to_string())
                    .collect();
                let correct = rng.gen_range(0..=3);
                options.insert(correct, answer.clone());
                AnswerFormat::MultipleChoice { options, correct }
            } else {
                AnswerFormat::OpenEnded
            }
        } else {
            AnswerFormat::OpenEnded
        };

        SynthOutcome::Task(SynthesizedTask {
            question,
            answer,
            target_object: target.id,
            format,
        })
    }

    fn rule(&self, req: &RuleRequest<'_>) -> Option<RuleText> {
        let task_text = req.instruction.trim().to_string();
        // The rationale names the target when it is in view, otherwise the whole view.
        let labels = req.forward.labels();
        let scene_text = match req.target_label {
            Some(t) if labels.contains(&t) => {
                let same: Vec<&str> = labels.iter().copied().filter(|l| *l == t).collect();
                describe_labels(&same)
            }
            _ => describe_labels(&labels),
        };
        let full_text = rule_sentence(req.category, &task_text, &scene_text);
        Some(RuleText {
            task_text,
            scene_text,
            full_text,
        })
    }
}
