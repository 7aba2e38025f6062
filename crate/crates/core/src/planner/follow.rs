use crate::gridworld::{Cell, CellState, OccupancyGrid, Pose};

use super::{astar_cells, OctileCost, PlanError};

/// Default per-decision travel cap (meters).
pub const DEFAULT_DELTA_MAX: f64 = 1.0;
/// Default arrival radius (meters).
pub const DEFAULT_PROXIMITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct FollowResult {
    pub pose: Pose,
    /// Meters moved during this call.
    pub traveled: f64,
    pub reached: bool,
    /// Cells visited, starting with the cell the agent started in.
    pub visited: Vec<Cell>,
}

/// Moves along the shortest path over currently-Free cells toward `target`.
///
/// Motion is cell-quantized: the agent hops between cell centers until it stands on
/// the target cell or the distance traveled reaches `delta_max`. A hop is never
/// started if it would carry the total past `delta_max + resolution`. `reached` is
/// set when the final pose is within `proximity` of the target center. The starting
/// pose is treated as the center of its cell.
pub fn follow(
    grid: &OccupancyGrid,
    from: Pose,
    target: Cell,
    delta_max: f64,
    proximity: f64,
) -> Result<FollowResult, PlanError> {
    let start = grid.cell_at(from.x, from.y).ok_or(PlanError::OutOfBounds)?;
    let (tx, ty) = grid.center(target);
    if start == target {
        return Ok(FollowResult {
            pose: from,
            traveled: 0.0,
            reached: true,
            visited: vec![start],
        });
    }
    let passable: Vec<bool> = grid.states().iter().map(|&s| s == CellState::Free).collect();
    let path = astar_cells(grid, &passable, start, target).ok_or(PlanError::NoPath { from: start, to: target })?;

    let res = grid.resolution();
    let cap_cells = delta_max / res;
    let mut cost = OctileCost::ZERO;
    let mut pose = from;
    let mut visited = vec![start];
    for w in path.windows(2) {
        if cost.cells() >= cap_cells {
            break;
        }
        let step = if w[0].x != w[1].x && w[0].y != w[1].y {
            OctileCost::DIAGONAL
        } else {
            OctileCost::STRAIGHT
        };
        if (cost + step).cells() > cap_cells + 1.0 + 1e-9 {
            break;
        }
        cost = cost + step;
        let (x0, y0) = grid.center(w[0]);
        let (x1, y1) = grid.center(w[1]);
        pose = Pose::new(x1, y1, (y1 - y0).atan2(x1 - x0));
        visited.push(w[1]);
    }
    Ok(FollowResult {
        pose,
        traveled: cost.meters(res),
        reached: pose.distance_to(tx, ty) <= proximity,
        visited,
    })
}
