//! Independent reference implementations and shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sage_core::cli::{cmd_genesis, input_grids, load_data, DataDir, DataLayout, RunConfig};
use sage_core::experience::ExperienceStore;
use sage_core::genesis::GenesisConfig;
use sage_core::gridworld::{Cell, CellState, OccupancyGrid};

pub fn random_grid(w: usize, h: usize, obstacle_p: f64, unknown_p: f64, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    let cells = (0..w * h)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < obstacle_p {
                CellState::Obstacle
            } else if u < obstacle_p + unknown_p {
                CellState::Unknown
            } else {
                CellState::Free
            }
        })
        .collect();
    OccupancyGrid::from_cells(w, h, 0.1, cells).unwrap()
}

/// Squared distance in cells to the nearest obstacle by scanning every obstacle.
pub fn brute_force_sq_distance(grid: &OccupancyGrid) -> Vec<Option<u64>> {
    let obstacles: Vec<Cell> = grid.cells().filter(|&c| grid.get(c) == CellState::Obstacle).collect();
    grid.cells()
        .map(|c| obstacles.iter().map(|&o| c.sq_dist(o)).min())
        .collect()
}

/// Plain Dijkstra over an 8-connected mask without corner cutting, costs in cells.
pub fn dijkstra(grid: &OccupancyGrid, passable: &[bool], source: Cell) -> Vec<f64> {
    let n = grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let s = grid.index(source);
    if !passable[s] {
        return dist;
    }
    dist[s] = 0.0;
    // O(n^2) selection keeps the oracle free of heap ordering subtleties.
    loop {
        let mut u = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && u.is_none_or(|j: usize| dist[i] < dist[j]) {
                u = Some(i);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        let c = grid.cell_of_index(u);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
                if !grid.contains(x, y) {
                    continue;
                }
                let v = grid.index(Cell::new(x as usize, y as usize));
                if !passable[v] {
                    continue;
                }
                if dx != 0 && dy != 0 {
                    let a = grid.index(Cell::new(x as usize, c.y));
                    let b = grid.index(Cell::new(c.x, y as usize));
                    if !passable[a] || !passable[b] {
                        continue;
                    }
                }
                let w = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
    }
    dist
}

/// Free cells with an Unknown cell directly above, below, left or right, by full scan.
pub fn naive_frontier(map: &OccupancyGrid) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for y in 0..map.height() as i64 {
        for x in 0..map.width() as i64 {
            if map.try_get(x, y) != Some(CellState::Free) {
                continue;
            }
            if [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|(dx, dy)| map.try_get(x + dx, y + dy) == Some(CellState::Unknown))
            {
                out.insert(Cell::new(x as usize, y as usize));
            }
        }
    }
    out
}

/// 8-connected components of `cells` by union-find.
pub fn components(cells: &BTreeSet<Cell>) -> BTreeSet<BTreeSet<Cell>> {
    let list: Vec<Cell> = cells.iter().copied().collect();
    let pos: HashMap<Cell, usize> = list.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for (i, c) in list.iter().enumerate() {
        for (j, d) in list.iter().enumerate().skip(i + 1) {
            if c.chebyshev(*d) == 1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, BTreeSet<Cell>> = HashMap::new();
    for c in &list {
        let r = find(&mut parent, pos[c]);
        groups.entry(r).or_default().insert(*c);
    }
    groups.into_values().collect()
}

/// Top-k rule ids by scoring every rule and repeatedly extracting the maximum
/// (earliest insertion wins ties).
pub fn exhaustive_top_k(store: &ExperienceStore, query: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut scores: Vec<Option<f64>> = store
        .rules()
        .iter()
        .map(|r| Some(r.embedding.iter().zip(query).map(|(a, b)| a * b).sum()))
        .collect();
    let mut out = Vec::new();
    for _ in 0..k.min(scores.len()) {
        let mut best: Option<usize> = None;
        for (i, s) in scores.iter().enumerate() {
            if let Some(s) = s {
                if best.is_none_or(|b| *s > scores[b].unwrap()) {
                    best = Some(i);
                }
            }
        }
        let b = best.unwrap();
        out.push((store.rules()[b].id.clone(), scores[b].unwrap()));
        scores[b] = None;
    }
    out
}

/// The default configuration with a given maze count, task total and master seed.
pub fn run_config(mazes: usize, n_tasks: usize, master_seed: u64) -> RunConfig {
    let base = RunConfig::default();
    RunConfig {
        mazes,
        master_seed,
        genesis: GenesisConfig { n_tasks, ..base.genesis.clone() },
        ..base
    }
}

/// Runs task synthesis for `cfg` into a temporary directory and loads it back.
pub fn synthesize(cfg: &RunConfig) -> DataDir {
    let dir = tempfile::tempdir().unwrap();
    let grids = input_grids(cfg, &[]).unwrap();
    let layout = DataLayout::in_dir(dir.path());
    cmd_genesis(cfg, &grids, &layout).unwrap();
    load_data(&layout).unwrap()
}

/// The default run: 500 tasks over 5 seeded mazes.
pub fn default_run() -> &'static (RunConfig, DataDir) {
    static RUN: OnceLock<(RunConfig, DataDir)> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = RunConfig::default();
        let data = synthesize(&cfg);
        (cfg, data)
    })
}

/// A small run for tests that only need some data: 60 tasks over 3 mazes.
pub fn small_run() -> &'static (RunConfig, DataDir) {
    static RUN: OnceLock<(RunConfig, DataDir)> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = run_config(3, 60, 11);
        let data = synthesize(&cfg);
        (cfg, data)
    })
}

/// 50 held-out mazes with one task each, for navigation.
pub fn navigation_run() -> &'static (RunConfig, DataDir) {
    static RUN: OnceLock<(RunConfig, DataDir)> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = run_config(50, 50, 5000);
        let data = synthesize(&cfg);
        (cfg, data)
    })
}
