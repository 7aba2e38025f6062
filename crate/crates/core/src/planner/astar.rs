use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::gridworld::{Cell, OccupancyGrid};

use super::{OctileCost, PlanError, Trajectory};

/// A* over the cells in `safe` with 8-connectivity and the octile heuristic.
///
/// Diagonal moves are only allowed when both orthogonal neighbours are also in `safe`
/// (no corner cutting). Open-list ties are broken by `(f, h, cell index)`.
pub fn astar(
    grid: &OccupancyGrid,
    safe: &BTreeSet<Cell>,
    start: Cell,
    goal: Cell,
) -> Result<Trajectory, PlanError> {
    if !safe.contains(&start) || !safe.contains(&goal) {
        return Err(PlanError::StartOrGoalUnsafe { start, goal });
    }
    let mut mask = vec![false; grid.len()];
    for &c in safe {
        mask[grid.index(c)] = true;
    }
    let cells = astar_cells(grid, &mask, start, goal).ok_or(PlanError::NotFound { start, goal })?;
    Ok(Trajectory::from_cells(grid, cells))
}

/// A* on a traversability mask indexed like the grid. Returns the cell sequence
/// from `start` to `goal`, or `None` when they are disconnected.
pub fn astar_cells(grid: &OccupancyGrid, passable: &[bool], start: Cell, goal: Cell) -> Option<Vec<Cell>> {
    let n = grid.len();
    if !passable[grid.index(start)] || !passable[grid.index(goal)] {
        return None;
    }
    let heuristic = |c: Cell| OctileCost::octile(c.x.abs_diff(goal.x), c.y.abs_diff(goal.y));

    let mut g: Vec<Option<OctileCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let s = grid.index(start);
    g[s] = Some(OctileCost::ZERO);
    let h0 = heuristic(start);
    open.push(Reverse((h0, h0, s)));

    while let Some(Reverse((_, _, idx))) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let cell = grid.cell_of_index(idx);
        if cell == goal {
            let mut path = vec![cell];
            let mut cur = idx;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(grid.cell_of_index(cur));
            }
            path.reverse();
            return Some(path);
        }
        let gc = g[idx].expect("closed cells have a cost");
        for (next, step) in passable_neighbors(grid, passable, cell) {
            let ni = grid.index(next);
            if closed[ni] {
                continue;
            }
            let cand = gc + step;
            if g[ni].is_none_or(|old| cand < old) {
                g[ni] = Some(cand);
                parent[ni] = idx;
                let h = heuristic(next);
                open.push(Reverse((cand + h, h, ni)));
            }
        }
    }
    None
}

/// Passable 8-neighbours with their step cost, excluding corner-cutting diagonals.
pub fn passable_neighbors<'a>(
    grid: &'a OccupancyGrid,
    passable: &'a [bool],
    cell: Cell,
) -> impl Iterator<Item = (Cell, OctileCost)> + 'a {
    grid.neighbors8(cell).filter_map(move |(next, diagonal)| {
        if !passable[grid.index(next)] {
            return None;
        }
        if diagonal {
            let a = Cell::new(next.x, cell.y);
            let b = Cell::new(cell.x, next.y);
            if !passable[grid.index(a)] || !passable[grid.index(b)] {
                return None;
            }
            Some((next, OctileCost::DIAGONAL))
        } else {
            Some((next, OctileCost::STRAIGHT))
        }
    })
}

/// Exact geodesic costs from `source` to every passable cell (Dijkstra).
pub fn geodesic_costs(grid: &OccupancyGrid, passable: &[bool], source: Cell) -> Vec<Option<OctileCost>> {
    let mut dist: Vec<Option<OctileCost>> = vec![None; grid.len()];
    if !passable[grid.index(source)] {
        return dist;
    }
    let mut heap = BinaryHeap::new();
    let s = grid.index(source);
    dist[s] = Some(OctileCost::ZERO);
    heap.push(Reverse((OctileCost::ZERO, s)));
    while let Some(Reverse((d, idx))) = heap.pop() {
        if dist[idx].is_some_and(|best| d > best) {
            continue;
        }
        for (next, step) in passable_neighbors(grid, passable, grid.cell_of_index(idx)) {
            let ni = grid.index(next);
            let cand = d + step;
            if dist[ni].is_none_or(|old| cand < old) {
                dist[ni] = Some(cand);
                heap.push(Reverse((cand, ni)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::CellState;

    fn all_free(grid: &OccupancyGrid) -> BTreeSet<Cell> {
        grid.cells_with(CellState::Free).collect()
    }

    #[test]
    fn identity_path() {
        let grid = OccupancyGrid::new(5, 5, 0.1, CellState::Free).unwrap();
        let t = astar(&grid, &all_free(&grid), Cell::new(2, 2), Cell::new(2, 2)).unwrap();
        assert_eq!(t.waypoints.len(), 1);
        assert_eq!(t.length, 0.0);
    }

    #[test]
    fn straight_corridor() {
        let grid = OccupancyGrid::new(10, 10, 0.1, CellState::Free).unwrap();
        let t = astar(&grid, &all_free(&grid), Cell::new(0, 0), Cell::new(0, 9)).unwrap();
        assert!((t.length - 0.9).abs() < 1e-12);
        assert_eq!(t.cells.len(), 10);
    }

    #[test]
    fn unsafe_endpoints_and_disconnection() {
        let grid = OccupancyGrid::from_rows(&["..#..", "..#..", "..#.."], 0.1).unwrap();
        let safe = all_free(&grid);
        assert!(matches!(
            astar(&grid, &safe, Cell::new(2, 0), Cell::new(0, 0)),
            Err(PlanError::StartOrGoalUnsafe { .. })
        ));
        assert!(matches!(
            astar(&grid, &safe, Cell::new(0, 0), Cell::new(4, 2)),
            Err(PlanError::NotFound { .. })
        ));
    }

    #[test]
    fn no_corner_cutting() {
        let grid = OccupancyGrid::from_rows(&[".#", "#."], 1.0).unwrap();
        let safe = all_free(&grid);
        assert!(astar(&grid, &safe, Cell::new(0, 0), Cell::new(1, 1)).is_err());
    }

    #[test]
    fn path_is_adjacent_and_length_consistent() {
        let grid = OccupancyGrid::from_rows(
            &["........", "..####..", "........", ".####...", "........"],
            0.1,
        )
        .unwrap();
        let t = astar(&grid, &all_free(&grid), Cell::new(0, 0), Cell::new(7, 4)).unwrap();
        let mut len = 0.0;
        for w in t.cells.windows(2) {
            assert_eq!(w[0].chebyshev(w[1]), 1);
            len += (w[0].sq_dist(w[1]) as f64).sqrt() * 0.1;
        }
        assert!((len - t.length).abs() < 1e-12);
    }
}
