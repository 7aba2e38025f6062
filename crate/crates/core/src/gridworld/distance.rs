//! Exact Euclidean distance transform.
//!
//! Distances are computed as integer squared cell distances with the two-pass
//! lower-envelope algorithm of Meijster et al. and only converted to meters on
//! request, so threshold tests against a whole number of cells are exact.

use std::collections::BTreeSet;

use super::{Cell, CellState, OccupancyGrid};

/// Squared distance marker for "no obstacle anywhere in the grid".
const NO_OBSTACLE: u64 = u64::MAX;

/// Distance from every cell center to the nearest Obstacle cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    sq: Vec<u64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Squared distance in cells, `None` when the grid has no obstacle.
    pub fn sq_cells(&self, cell: Cell) -> Option<u64> {
        let v = self.sq[cell.y * self.width + cell.x];
        (v != NO_OBSTACLE).then_some(v)
    }

    /// Distance in cells; `f64::INFINITY` when the grid has no obstacle.
    pub fn cells(&self, cell: Cell) -> f64 {
        self.sq_cells(cell)
            .map_or(f64::INFINITY, |v| (v as f64).sqrt())
    }

    /// Distance in meters; `f64::INFINITY` when the grid has no obstacle.
    pub fn meters(&self, cell: Cell) -> f64 {
        self.cells(cell) * self.resolution
    }

    /// Whether the clearance at `cell` is at least `delta` cells.
    pub fn clearance_at_least(&self, cell: Cell, delta: f64) -> bool {
        match self.sq_cells(cell) {
            None => true,
            Some(_) if delta <= 0.0 => true,
            Some(_) if delta.is_infinite() => false,
            Some(v) => (v as f64) >= delta * delta,
        }
    }
}

/// Exact EDT of `grid`. Only Obstacle cells act as sources; Unknown cells are treated as open.
pub fn compute_distance_field(grid: &OccupancyGrid) -> DistanceField {
    let (w, h) = (grid.width(), grid.height());
    // Larger than any realizable in-grid distance, so an envelope value at or above
    // `inf * inf` means the row saw no obstacle at all.
    let inf = (w + h) as i64;
    let states = grid.states();

    // Column pass: vertical distance to the nearest obstacle in the same column.
    let mut g = vec![inf; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if states[y * w + x] == CellState::Obstacle {
                last = Some(y);
            }
            if let Some(ly) = last {
                g[y * w + x] = (y - ly) as i64;
            }
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if states[y * w + x] == CellState::Obstacle {
                next = Some(y);
            }
            if let Some(ny) = next {
                let d = (ny - y) as i64;
                if d < g[y * w + x] {
                    g[y * w + x] = d;
                }
            }
        }
    }

    // Row pass: lower envelope of parabolas (x - i)^2 + g(i)^2.
    let mut sq = vec![NO_OBSTACLE; w * h];
    let mut s = vec![0usize; w];
    let mut t = vec![0i64; w];
    for y in 0..h {
        let row = &g[y * w..(y + 1) * w];
        let f = |x: i64, i: usize| -> i64 {
            let dx = x - i as i64;
            dx * dx + row[i] * row[i]
        };
        let sep = |i: usize, u: usize| -> i64 {
            let (ii, uu) = (i as i64, u as i64);
            (uu * uu - ii * ii + row[u] * row[u] - row[i] * row[i]).div_euclid(2 * (uu - ii))
        };

        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..w {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let wv = 1 + sep(s[q as usize], u);
                if wv < w as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wv;
                }
            }
        }
        for u in (0..w).rev() {
            let v = f(u as i64, s[q as usize]);
            if v < inf * inf {
                sq[y * w + u] = v as u64;
            }
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
    }

    DistanceField {
        width: w,
        height: h,
        resolution: grid.resolution(),
        sq,
    }
}

/// Free cells whose clearance is at least `delta` cells.
pub fn safe_space(grid: &OccupancyGrid, field: &DistanceField, delta: f64) -> BTreeSet<Cell> {
    grid.cells_with(CellState::Free)
        .filter(|&c| field.clearance_at_least(c, delta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_center_obstacle() {
        let grid = OccupancyGrid::from_rows(&["...", ".#.", "..."], 0.1).unwrap();
        let d = compute_distance_field(&grid);
        assert_eq!(d.sq_cells(Cell::new(0, 0)), Some(2));
        assert!((d.meters(Cell::new(0, 0)) - 2f64.sqrt() * 0.1).abs() < 1e-12);
        assert_eq!(d.sq_cells(Cell::new(1, 1)), Some(0));
        assert_eq!(d.sq_cells(Cell::new(1, 0)), Some(1));
    }

    #[test]
    fn no_obstacle_is_infinite() {
        let grid = OccupancyGrid::new(5, 4, 0.1, CellState::Free).unwrap();
        let d = compute_distance_field(&grid);
        assert!(grid.cells().all(|c| d.meters(c).is_infinite()));
    }

    #[test]
    fn unknown_is_not_a_source() {
        let grid = OccupancyGrid::from_rows(&["#???", "...."], 1.0).unwrap();
        let d = compute_distance_field(&grid);
        assert_eq!(d.sq_cells(Cell::new(3, 0)), Some(9));
        assert_eq!(d.sq_cells(Cell::new(3, 1)), Some(10));
    }

    #[test]
    fn safe_space_thresholds() {
        let grid = OccupancyGrid::from_rows(&["#....", ".....", "....."], 0.1).unwrap();
        let d = compute_distance_field(&grid);
        let free = grid.count(CellState::Free);
        assert_eq!(safe_space(&grid, &d, 0.0).len(), free);
        assert!(safe_space(&grid, &d, f64::INFINITY).is_empty());
        let two = safe_space(&grid, &d, 2.0);
        assert!(two.iter().all(|&c| c.sq_dist(Cell::new(0, 0)) >= 4));
        assert!(two.contains(&Cell::new(2, 0)));
        assert!(!two.contains(&Cell::new(1, 1)));
    }
}
