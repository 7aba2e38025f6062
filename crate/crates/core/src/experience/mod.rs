//! Hashed bag-of-token embeddings and an exact-scan store of IF–THEN rules.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::seed::fnv1a;

/// Default embedding dimension.
pub const DEFAULT_DIMENSION: usize = 64;
/// Default number of rules retrieved per query.
pub const DEFAULT_K: usize = 1;

#[derive(Debug, thiserror::Error)]
pub enum ExperienceError {
    #[error("cannot embed text without tokens")]
    EmptyText,
    #[error("rule id {0:?} already stored")]
    DuplicateId(String),
    #[error("rule text does not follow the IF–AND–THEN pattern: {0:?}")]
    PatternViolation(String),
    #[error("embedding has dimension {found}, store expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Canonical rule sentence: `IF answering|searching <task> AND observing <scene> THEN prioritize this path.`
pub fn rule_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^IF (answering|searching) \S.* AND observing \S.* THEN prioritize this path\.$")
            .expect("valid rule regex")
    })
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Signed feature hashing of the token bag into `dimension` buckets, L2-normalized.
pub fn embed_with(text: &str, dimension: usize) -> Result<Vec<f64>, ExperienceError> {
    let tokens = tokenize(text);
    if tokens.is_empty() || dimension == 0 {
        return Err(ExperienceError::EmptyText);
    }
    let mut v = vec![0.0; dimension];
    for t in &tokens {
        let h = fnv1a(t.as_bytes());
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[(h % dimension as u64) as usize] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        // Every token cancelled out; fall back to an unsigned bucket so the vector stays unit.
        let h = fnv1a(tokens[0].as_bytes());
        v[(h % dimension as u64) as usize] = 1.0;
        return Ok(v);
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

pub fn embed(text: &str) -> Result<Vec<f64>, ExperienceError> {
    embed_with(text, DEFAULT_DIMENSION)
}

/// Dot product; equals cosine similarity for unit vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Text that both rules and queries are embedded from.
pub fn query_text(task: &str, scene: &str) -> String {
    format!("{task} {scene}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceRule {
    pub id: String,
    pub task_text: String,
    pub scene_text: String,
    pub full_text: String,
    pub embedding: Vec<f64>,
    #[serde(default)]
    pub trajectory_id: String,
}

impl ExperienceRule {
    pub fn new(
        id: impl Into<String>,
        task_text: impl Into<String>,
        scene_text: impl Into<String>,
        full_text: impl Into<String>,
        trajectory_id: impl Into<String>,
        dimension: usize,
    ) -> Result<Self, ExperienceError> {
        let task_text = task_text.into();
        let scene_text = scene_text.into();
        let embedding = embed_with(&query_text(&task_text, &scene_text), dimension)?;
        Ok(Self {
            id: id.into(),
            task_text,
            scene_text,
            full_text: full_text.into(),
            embedding,
            trajectory_id: trajectory_id.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedContext {
    pub rules: Vec<(ExperienceRule, f64)>,
    pub k: usize,
}

impl RetrievedContext {
    pub fn empty(k: usize) -> Self {
        Self { rules: Vec::new(), k }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// How the store answers a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetrievalMode {
    #[default]
    Matched,
    /// Surface-matching task, divergent scene.
    Mismatched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoreFile {
    dimension: usize,
    rules: Vec<ExperienceRule>,
}

/// Exact-scan rule store. Wrap in an `RwLock` for shared access across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperienceStore {
    dimension: usize,
    rules: Vec<ExperienceRule>,
    by_id: HashMap<String, usize>,
}

impl Default for ExperienceStore {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

impl ExperienceStore {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            rules: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[ExperienceRule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&ExperienceRule> {
        self.by_id.get(id).map(|&i| &self.rules[i])
    }

    pub fn insert(&mut self, rule: ExperienceRule) -> Result<String, ExperienceError> {
        if !rule_pattern().is_match(&rule.full_text) {
            return Err(ExperienceError::PatternViolation(rule.full_text));
        }
        if rule.embedding.len() != self.dimension {
            return Err(ExperienceError::DimensionMismatch {
                expected: self.dimension,
                found: rule.embedding.len(),
            });
        }
        if self.by_id.contains_key(&rule.id) {
            return Err(ExperienceError::DuplicateId(rule.id));
        }
        let id = rule.id.clone();
        self.by_id.insert(id.clone(), self.rules.len());
        self.rules.push(rule);
        Ok(id)
    }

    /// The `k` rules most cosine-similar to the query; ties go to the earlier insertion.
    pub fn retrieve(&self, task: &str, scene: &str, k: usize) -> Result<RetrievedContext, ExperienceError> {
        self.retrieve_mode(task, scene, k, RetrievalMode::Matched)
    }

    pub fn retrieve_mode(
        &self,
        task: &str,
        scene: &str,
        k: usize,
        mode: RetrievalMode,
    ) -> Result<RetrievedContext, ExperienceError> {
        if k == 0 {
            return Err(ExperienceError::ZeroK);
        }
        if self.rules.is_empty() {
            return Ok(RetrievedContext::empty(k));
        }
        let q = embed_with(&query_text(task, scene), self.dimension)?;
        let scored: Vec<(usize, f64)> = match mode {
            RetrievalMode::Matched => {
                let all: Vec<(usize, f64)> =
                    self.rules.iter().enumerate().map(|(i, r)| (i, cosine(&q, &r.embedding))).collect();
                top_k(all, k)
            }
            RetrievalMode::Mismatched => {
                let qt = embed_with(task, self.dimension)?;
                let qs = embed_with(scene, self.dimension).ok();
                let by_task: Vec<(usize, f64)> = self
                    .rules
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i, embed_with(&r.task_text, self.dimension).map_or(0.0, |e| cosine(&qt, &e))))
                    .collect();
                let shortlist = top_k(by_task, 2 * k);
                let divergent: Vec<(usize, f64)> = shortlist
                    .into_iter()
                    .map(|(i, _)| {
                        let s = match (&qs, embed_with(&self.rules[i].scene_text, self.dimension)) {
                            (Some(a), Ok(b)) => cosine(a, &b),
                            _ => 0.0,
                        };
                        (i, -s)
                    })
                    .collect();
                top_k(divergent, k)
                    .into_iter()
                    .map(|(i, _)| (i, cosine(&q, &self.rules[i].embedding)))
                    .collect()
            }
        };
        Ok(RetrievedContext {
            rules: scored.into_iter().map(|(i, s)| (self.rules[i].clone(), s)).collect(),
            k,
        })
    }

    pub fn to_json(&self) -> Result<String, ExperienceError> {
        let file = StoreFile {
            dimension: self.dimension,
            rules: self.rules.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ExperienceError> {
        let file: StoreFile = serde_json::from_str(text)?;
        let mut store = Self::new(file.dimension);
        for r in file.rules {
            store.insert(r)?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ExperienceError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperienceError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Stable selection of the `k` highest scores (earlier index wins ties).
fn top_k(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}
