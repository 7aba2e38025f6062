use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::gridworld::{compute_distance_field, Cell, CellState, OccupancyGrid};

/// A remembered object, unique per `(label, cell)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub object_id: usize,
    pub label: String,
    pub cell: Cell,
    pub first_seen: usize,
    pub descriptor: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryBuffer {
    pub entries: Vec<MemoryEntry>,
    #[serde(skip)]
    index: BTreeMap<(String, Cell), usize>,
}

impl MemoryBuffer {
    /// Appends the entry unless its `(label, cell)` is already known. Returns whether it was new.
    pub fn insert(&mut self, entry: MemoryEntry) -> bool {
        let key = (entry.label.clone(), entry.cell);
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        true
    }

    pub fn contains(&self, label: &str, cell: Cell) -> bool {
        self.index.contains_key(&(label.to_string(), cell))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One connected run of frontier cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierNode {
    /// Representative: the cluster cell with the largest obstacle clearance.
    pub cell: Cell,
    pub cluster_size: usize,
    pub descriptor: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierBuffer {
    pub nodes: Vec<FrontierNode>,
}

impl FrontierBuffer {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

fn is_frontier(map: &OccupancyGrid, cell: Cell) -> bool {
    map.get(cell) == CellState::Free && map.neighbors4(cell).any(|n| map.get(n) == CellState::Unknown)
}

/// Free cells with at least one 4-neighbor still Unknown.
pub fn frontier_cells(map: &OccupancyGrid) -> BTreeSet<Cell> {
    map.cells().filter(|&c| is_frontier(map, c)).collect()
}

/// Groups frontier cells into 8-connected clusters, ordered by their lowest cell index.
/// Each cluster is returned with its representative and cells; descriptors are left empty.
pub fn frontier_clusters(map: &OccupancyGrid) -> Vec<(FrontierNode, Vec<Cell>)> {
    let field = compute_distance_field(map);
    let mut seen = vec![false; map.len()];
    let mut out = Vec::new();
    for start in map.cells() {
        if seen[map.index(start)] || !is_frontier(map, start) {
            continue;
        }
        seen[map.index(start)] = true;
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            cells.push(c);
            for (n, _) in map.neighbors8(c) {
                let i = map.index(n);
                if !seen[i] && is_frontier(map, n) {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        cells.sort_by_key(|&c| map.index(c));
        let mut best = cells[0];
        for &c in &cells[1..] {
            if field.sq_cells(c) > field.sq_cells(best) {
                best = c;
            }
        }
        out.push((
            FrontierNode {
                cell: best,
                cluster_size: cells.len(),
                descriptor: String::new(),
            },
            cells,
        ));
    }
    out
}
