use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::gridworld::{Cell, OccupancyGrid, Pose};

use super::{OctileCost, PlanError};

/// A grid path with per-waypoint headings.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub cells: Vec<Cell>,
    /// Cell centers; heading points at the next waypoint, the last one inherits.
    pub waypoints: Vec<Pose>,
    pub cost: OctileCost,
    /// Metric length in meters.
    pub length: f64,
    /// Indices into `waypoints` chosen as keypoints (empty until discretized).
    pub keypoints: Vec<usize>,
}

impl Trajectory {
    pub fn from_cells(grid: &OccupancyGrid, cells: Vec<Cell>) -> Self {
        let mut cost = OctileCost::ZERO;
        for w in cells.windows(2) {
            cost = cost
                + if w[0].x != w[1].x && w[0].y != w[1].y {
                    OctileCost::DIAGONAL
                } else {
                    OctileCost::STRAIGHT
                };
        }
        let centers: Vec<(f64, f64)> = cells.iter().map(|&c| grid.center(c)).collect();
        let waypoints = headings_toward_next(&centers)
            .into_iter()
            .zip(&centers)
            .map(|(theta, &(x, y))| Pose::new(x, y, theta))
            .collect();
        Self {
            cells,
            waypoints,
            cost,
            length: cost.meters(grid.resolution()),
            keypoints: Vec::new(),
        }
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().expect("trajectory is never empty")
    }

    /// Path length from waypoint `i` to the end, in meters.
    pub fn remaining_from(&self, i: usize, resolution: f64) -> f64 {
        let mut cost = OctileCost::ZERO;
        for w in self.cells[i..].windows(2) {
            cost = cost
                + if w[0].x != w[1].x && w[0].y != w[1].y {
                    OctileCost::DIAGONAL
                } else {
                    OctileCost::STRAIGHT
                };
        }
        cost.meters(resolution)
    }

    pub fn to_record(&self, id: &str, scene: &str) -> TrajectoryRecord {
        TrajectoryRecord {
            id: id.to_string(),
            scene: scene.to_string(),
            waypoints: self.waypoints.iter().map(|p| [p.x, p.y, p.theta]).collect(),
            length_m: self.length,
            keypoints: self.keypoints.clone(),
        }
    }
}

/// `atan2` toward the following point; the final point keeps its predecessor's heading.
pub fn headings_toward_next(points: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        out.push((w[1].1 - w[0].1).atan2(w[1].0 - w[0].0));
    }
    match out.last().copied() {
        Some(last) => out.push(last),
        None if !points.is_empty() => out.push(0.0),
        None => {}
    }
    out
}

/// One line of the trajectory JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub id: String,
    pub scene: String,
    pub waypoints: Vec<[f64; 3]>,
    pub length_m: f64,
    pub keypoints: Vec<usize>,
}

pub fn write_trajectories<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> Result<(), PlanError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trajectories<R: BufRead>(input: R) -> Result<Vec<TrajectoryRecord>, PlanError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
