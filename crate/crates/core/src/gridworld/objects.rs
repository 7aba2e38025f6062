use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Cell;

/// A labeled object resting on a free cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: usize,
    pub label: String,
    pub cell: Cell,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl SceneObject {
    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }
}

/// Objects whose cell is in `visible`, in id order.
pub fn objects_in<'a>(objects: &'a [SceneObject], visible: &BTreeSet<Cell>) -> Vec<&'a SceneObject> {
    let mut out: Vec<&SceneObject> = objects.iter().filter(|o| visible.contains(&o.cell)).collect();
    out.sort_by_key(|o| o.id);
    out
}
