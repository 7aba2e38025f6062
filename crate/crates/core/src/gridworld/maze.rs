//! Seeded recursive-division maze generator.
//!
//! The maze is built on a lattice of `rows x cols` rooms, each `room` cells wide,
//! separated by one-cell walls. Every division line leaves exactly one full-width
//! doorway, so the room graph is a spanning tree and every pair of rooms is connected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, CellState, GridError, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeSpec {
    pub rows: usize,
    pub cols: usize,
    /// Interior width of one room, in cells.
    pub room: usize,
    pub resolution: f64,
}

impl Default for MazeSpec {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 4,
            room: 11,
            resolution: super::DEFAULT_RESOLUTION,
        }
    }
}

impl MazeSpec {
    pub fn width(&self) -> usize {
        self.cols * (self.room + 1) + 1
    }

    pub fn height(&self) -> usize {
        self.rows * (self.room + 1) + 1
    }
}

pub fn generate_maze(spec: &MazeSpec, seed: u64) -> Result<OccupancyGrid, GridError> {
    if spec.rows == 0 || spec.cols == 0 || spec.room == 0 {
        return Err(GridError::TooSmall {
            width: spec.cols,
            height: spec.rows,
        });
    }
    let mut grid = OccupancyGrid::new(spec.width(), spec.height(), spec.resolution, CellState::Free)?;
    let (w, h) = (grid.width(), grid.height());
    for x in 0..w {
        grid.set(Cell::new(x, 0), CellState::Obstacle);
        grid.set(Cell::new(x, h - 1), CellState::Obstacle);
    }
    for y in 0..h {
        grid.set(Cell::new(0, y), CellState::Obstacle);
        grid.set(Cell::new(w - 1, y), CellState::Obstacle);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    divide(&mut grid, spec.room, (0, 0, spec.cols, spec.rows), &mut rng);
    Ok(grid)
}

/// Splits the room block `(c0, r0, c1, r1)` (half-open, in rooms).
fn divide(grid: &mut OccupancyGrid, room: usize, block: (usize, usize, usize, usize), rng: &mut ChaCha8Rng) {
    let (c0, r0, c1, r1) = block;
    let (nc, nr) = (c1 - c0, r1 - r0);
    if nc < 2 && nr < 2 {
        return;
    }
    let pitch = room + 1;
    let horizontal = match (nc >= 2, nr >= 2) {
        (true, true) => {
            if nr > nc {
                true
            } else if nc > nr {
                false
            } else {
                rng.gen_bool(0.5)
            }
        }
        (false, true) => true,
        _ => false,
    };
    if horizontal {
        // wall between room rows `split - 1` and `split`
        let split = rng.gen_range(r0 + 1..r1);
        let door = rng.gen_range(c0..c1);
        let y = split * pitch;
        for x in c0 * pitch..=c1 * pitch {
            grid.set(Cell::new(x, y), CellState::Obstacle);
        }
        for x in door * pitch + 1..(door + 1) * pitch {
            grid.set(Cell::new(x, y), CellState::Free);
        }
        divide(grid, room, (c0, r0, c1, split), rng);
        divide(grid, room, (c0, split, c1, r1), rng);
    } else {
        let split = rng.gen_range(c0 + 1..c1);
        let door = rng.gen_range(r0..r1);
        let x = split * pitch;
        for y in r0 * pitch..=r1 * pitch {
            grid.set(Cell::new(x, y), CellState::Obstacle);
        }
        for y in door * pitch + 1..(door + 1) * pitch {
            grid.set(Cell::new(x, y), CellState::Free);
        }
        divide(grid, room, (c0, r0, split, r1), rng);
        divide(grid, room, (split, r0, c1, r1), rng);
    }
}
