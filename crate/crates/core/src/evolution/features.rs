//! Candidate features and the reference answerer, shared by training and navigation.

use crate::experience::{cosine, embed_with, ExperienceRule};
use crate::genesis::{answer_for, object_function, object_kind, TaskCategory, Triple};
use crate::gridworld::{wrap_angle, SceneObject};

/// Hashing width for feature-level text matching. Much wider than the rule store so that
/// short descriptors rarely lose their shared tokens to bucket collisions.
pub const MATCH_DIMENSION: usize = 1024;

/// Object-count feature saturates at this many objects.
const COUNT_SCALE: f64 = 5.0;

/// `color material label kind function`: what an observer knows about an object, and
/// the text it is matched against a query by.
pub fn object_descriptor(o: &SceneObject) -> String {
    let mut parts: Vec<String> = ["color", "material"]
        .iter()
        .filter_map(|k| o.attribute(k))
        .map(str::to_string)
        .collect();
    parts.push(o.label.clone());
    parts.push(object_kind(&o.label).to_string());
    parts.push(object_function(&o.label));
    parts.join(" ")
}

/// Best cosine between the query embedding and any object descriptor; 0 without objects.
pub fn query_match(query: &[f64], objects: &[&SceneObject]) -> f64 {
    objects
        .iter()
        .filter_map(|o| embed_with(&object_descriptor(o), query.len()).ok())
        .map(|e| cosine(query, &e))
        .fold(0.0, f64::max)
}

/// Best cosine between a candidate's scene embedding and the scene clause of any retrieved rule.
pub fn experience_match(rules: &[(ExperienceRule, f64)], scene: &[f64]) -> f64 {
    rules
        .iter()
        .filter_map(|(r, _)| embed_with(&r.scene_text, scene.len()).ok())
        .map(|e| cosine(scene, &e))
        .fold(0.0, f64::max)
}

pub fn object_count(n: usize) -> f64 {
    (n as f64 / COUNT_SCALE).min(2.0)
}

/// Cosine of the angle between two headings.
pub fn heading_alignment(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).cos()
}

/// Answers from a set of observed objects: picks the object that best matches the
/// question (ties: lowest id) and applies the category's answer template to it.
pub fn reference_answer(
    category: TaskCategory,
    instruction: &str,
    objects: &[&SceneObject],
    triples: &[Triple],
) -> String {
    let Ok(q) = embed_with(instruction, MATCH_DIMENSION) else {
        return "unknown".into();
    };
    let mut best: Option<(&SceneObject, f64)> = None;
    for o in objects {
        let s = embed_with(&object_descriptor(o), MATCH_DIMENSION).map_or(0.0, |e| cosine(&q, &e));
        if best.is_none_or(|(b, bs)| s > bs || (s == bs && o.id < b.id)) {
            best = Some((*o, s));
        }
    }
    match best {
        Some((o, _)) => answer_for(category, o, objects, triples),
        None => "nothing".into(),
    }
}
