use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::{line_of_sight, Cell, CellState, OccupancyGrid, SceneObject};

use super::GenesisError;

/// Default object vocabulary.
pub const DEFAULT_CATALOG: &[&str] = &[
    "chair", "sofa", "table", "bed", "lamp", "plant", "tv", "cabinet", "piano", "bench", "sink",
    "refrigerator", "desk", "bookshelf", "microwave", "toilet",
];

const COLORS: &[&str] = &["red", "blue", "green", "white", "black", "brown", "gray", "yellow"];
const MATERIALS: &[&str] = &["wooden", "metal", "plastic", "fabric", "glass"];
const STATES: &[&str] = &["open", "closed", "on", "off", "empty", "occupied"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftOf,
    RightOf,
    Near,
    Above,
    Below,
    InRoom,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::LeftOf,
        Relation::RightOf,
        Relation::Near,
        Relation::Above,
        Relation::Below,
        Relation::InRoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::LeftOf => "left_of",
            Relation::RightOf => "right_of",
            Relation::Near => "near",
            Relation::Above => "above",
            Relation::Below => "below",
            Relation::InRoom => "in_room",
        }
    }

    /// English phrase used in synthesized text.
    pub fn phrase(self) -> &'static str {
        match self {
            Relation::LeftOf => "to the left of",
            Relation::RightOf => "to the right of",
            Relation::Near => "near",
            Relation::Above => "above",
            Relation::Below => "below",
            Relation::InRoom => "in the same room as",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(subject, relation, object)` over object ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: usize,
    pub relation: Relation,
    pub object: usize,
}

/// Geometric thresholds (cells) for deriving scene-graph relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationConfig {
    /// `left_of` iff `subject.x - object.x < -lateral`; `right_of` mirrors it.
    pub lateral: f64,
    /// `above` iff `subject.y - object.y < -vertical` (row 0 is the top); `below` mirrors it.
    pub vertical: f64,
    /// `near` iff the Euclidean distance is at most this.
    pub near: f64,
    /// `in_room` iff mutually visible and at most this far apart.
    pub room: f64,
}

impl Default for RelationConfig {
    fn default() -> Self {
        Self {
            lateral: 2.0,
            vertical: 2.0,
            near: 5.0,
            room: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub grid_id: String,
    pub objects: Vec<SceneObject>,
    pub scene_graph: Vec<Triple>,
}

impl SyntheticScene {
    pub fn object(&self, id: usize) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn relations_of(&self, id: usize) -> impl Iterator<Item = &Triple> {
        self.scene_graph.iter().filter(move |t| t.subject == id)
    }
}

/// Relations that hold from `a` to `b`, in [`Relation::ALL`] order.
pub fn relations_between(grid: &OccupancyGrid, a: Cell, b: Cell, cfg: &RelationConfig) -> Vec<Relation> {
    let dx = a.x as f64 - b.x as f64;
    let dy = a.y as f64 - b.y as f64;
    let dist = dx.hypot(dy);
    let mut out = Vec::new();
    if dx < -cfg.lateral {
        out.push(Relation::LeftOf);
    }
    if dx > cfg.lateral {
        out.push(Relation::RightOf);
    }
    if dist <= cfg.near {
        out.push(Relation::Near);
    }
    if dy < -cfg.vertical {
        out.push(Relation::Above);
    }
    if dy > cfg.vertical {
        out.push(Relation::Below);
    }
    if dist <= cfg.room && line_of_sight(grid, grid.pose_at(a, 0.0), b) {
        out.push(Relation::InRoom);
    }
    out
}

/// Scatters `ceil(density * free)` labeled objects over distinct free cells.
pub fn place_objects(
    grid: &OccupancyGrid,
    grid_id: &str,
    catalog: &[String],
    density: f64,
    relations: &RelationConfig,
    rng_seed: u64,
) -> Result<SyntheticScene, GenesisError> {
    if catalog.is_empty() {
        return Err(GenesisError::EmptyCatalog);
    }
    if !(density > 0.0 && density <= 0.2) {
        return Err(GenesisError::InvalidDensity(density));
    }
    let free: Vec<Cell> = grid.cells_with(CellState::Free).collect();
    let wanted = (density * free.len() as f64).ceil() as usize;
    if free.is_empty() || wanted > free.len() {
        return Err(GenesisError::NotEnoughFreeCells {
            needed: wanted.max(1),
            available: free.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picks = sample(&mut rng, free.len(), wanted).into_vec();
    picks.sort_unstable();

    let objects: Vec<SceneObject> = picks
        .into_iter()
        .enumerate()
        .map(|(id, i)| {
            let label = catalog.choose(&mut rng).expect("catalog is not empty").clone();
            let mut attributes = BTreeMap::new();
            attributes.insert("color".into(), COLORS[rng.gen_range(0..COLORS.len())].into());
            attributes.insert(
                "material".into(),
                MATERIALS[rng.gen_range(0..MATERIALS.len())].into(),
            );
            attributes.insert("state".into(), STATES[rng.gen_range(0..STATES.len())].into());
            SceneObject {
                id,
                label,
                cell: free[i],
                attributes,
            }
        })
        .collect();

    let mut scene_graph = Vec::new();
    for a in &objects {
        for b in &objects {
            if a.id == b.id {
                continue;
            }
            for relation in relations_between(grid, a.cell, b.cell, relations) {
                scene_graph.push(Triple {
                    subject: a.id,
                    relation,
                    object: b.id,
                });
            }
        }
    }
    Ok(SyntheticScene {
        grid_id: grid_id.to_string(),
        objects,
        scene_graph,
    })
}
