use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use super::{wrap_angle, Cell, OccupancyGrid, Pose};

/// Default horizontal field of view (radians).
pub const DEFAULT_HFOV: f64 = 2.0 * PI / 3.0;
/// Default sensing range (meters).
pub const DEFAULT_RANGE: f64 = 1.7;
/// Heading offsets of the forward, left and right views.
pub const VIEW_OFFSETS: [f64; 3] = [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0];

const ANGLE_EPS: f64 = 1e-9;

/// Field of view and range of a simulated camera.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SensorConfig {
    pub hfov: f64,
    pub range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            hfov: DEFAULT_HFOV,
            range: DEFAULT_RANGE,
        }
    }
}

/// Cells seen from `pose` inside a cone of width `hfov` up to `range` meters.
///
/// A cell is visible when it lies within range and inside the cone, and the segment
/// from the pose to its center, sampled at steps of at most half a cell, crosses no
/// sight-blocking cell before entering it. Blocking cells are themselves reported.
/// The pose cell is always visible.
pub fn visible_cells(grid: &OccupancyGrid, pose: Pose, hfov: f64, range: f64) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    let Some(origin) = grid.cell_at(pose.x, pose.y) else {
        return out;
    };
    out.insert(origin);

    let res = grid.resolution();
    let reach = (range / res).ceil() as i64 + 1;
    let (ox, oy) = (origin.x as i64, origin.y as i64);
    let x0 = (ox - reach).max(0);
    let x1 = (ox + reach).min(grid.width() as i64 - 1);
    let y0 = (oy - reach).max(0);
    let y1 = (oy + reach).min(grid.height() as i64 - 1);

    for y in y0..=y1 {
        for x in x0..=x1 {
            let cell = Cell::new(x as usize, y as usize);
            if cell == origin {
                continue;
            }
            let (cx, cy) = grid.center(cell);
            if !in_sensor_cone(pose, cx, cy, hfov, range) {
                continue;
            }
            if line_of_sight(grid, pose, cell) {
                out.insert(cell);
            }
        }
    }
    out
}

/// Range and angular-cone membership of a metric point.
pub fn in_sensor_cone(pose: Pose, px: f64, py: f64, hfov: f64, range: f64) -> bool {
    let (dx, dy) = (px - pose.x, py - pose.y);
    let dist = dx.hypot(dy);
    if dist > range + ANGLE_EPS {
        return false;
    }
    if hfov >= TAU - ANGLE_EPS || dist == 0.0 {
        return true;
    }
    let bearing = wrap_angle(dy.atan2(dx) - pose.theta);
    bearing.abs() <= hfov / 2.0 + ANGLE_EPS
}

/// Marches from the pose to the center of `target`. Returns false if a blocking cell
/// other than the target is met on the way.
pub fn line_of_sight(grid: &OccupancyGrid, pose: Pose, target: Cell) -> bool {
    let (tx, ty) = grid.center(target);
    let (dx, dy) = (tx - pose.x, ty - pose.y);
    let len = dx.hypot(dy);
    let step = grid.resolution() / 2.0;
    let n = (len / step).ceil().max(1.0) as usize;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let Some(c) = grid.cell_at(pose.x + t * dx, pose.y + t * dy) else {
            return false;
        };
        if c == target {
            return true;
        }
        if grid.get(c).blocks_sight() {
            return false;
        }
    }
    true
}

/// Forward, left and right views at a pose.
pub fn three_views(grid: &OccupancyGrid, pose: Pose, hfov: f64, range: f64) -> [BTreeSet<Cell>; 3] {
    VIEW_OFFSETS.map(|off| visible_cells(grid, pose.with_heading(pose.theta + off), hfov, range))
}
