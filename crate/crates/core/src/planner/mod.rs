//! Geodesic search, trajectory discretization and the step-limited path follower.

mod astar;
mod cost;
mod discretize;
mod follow;
mod trajectory;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{Cell, OccupancyGrid};

pub use astar::{astar, astar_cells, geodesic_costs, passable_neighbors};
pub use cost::OctileCost;
pub use discretize::{
    discretize, sample_keypoints, ObservationTriplet, Sighting, ViewObservation, MAX_KEYPOINTS,
};
pub use follow::{follow, FollowResult, DEFAULT_DELTA_MAX, DEFAULT_PROXIMITY};
pub use trajectory::{
    headings_toward_next, read_trajectories, write_trajectories, Trajectory, TrajectoryRecord,
};

/// Default upper bound on synthesized trajectory length (meters, exclusive).
pub const DEFAULT_MAX_LENGTH: f64 = 20.0;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("start {start} or goal {goal} lies outside the safe space")]
    StartOrGoalUnsafe { start: Cell, goal: Cell },
    #[error("no path from {start} to {goal}")]
    NotFound { start: Cell, goal: Cell },
    #[error("no path over free cells from {from} to {to}")]
    NoPath { from: Cell, to: Cell },
    #[error("safe space is empty")]
    EmptySafeSpace,
    #[error("trajectory has {0} waypoints, need at least 2")]
    TrajectoryTooShort(usize),
    #[error("pose lies outside the grid")]
    OutOfBounds,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Why a sampled start/goal pair was not kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointRejection {
    NotFound,
    TooLong { length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndpointSample {
    Accepted {
        start: Cell,
        goal: Cell,
        trajectory: Trajectory,
    },
    Rejected {
        start: Cell,
        goal: Cell,
        reason: EndpointRejection,
    },
}

/// Draws a start and goal independently and uniformly from `safe`, plans between them
/// and keeps the pair only when a path shorter than `max_length` meters exists.
pub fn sample_task_endpoints(
    grid: &OccupancyGrid,
    safe: &BTreeSet<Cell>,
    rng_seed: u64,
    max_length: f64,
) -> Result<EndpointSample, PlanError> {
    if safe.is_empty() {
        return Err(PlanError::EmptySafeSpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let start = *safe.iter().nth(rng.gen_range(0..safe.len())).expect("index in range");
    let goal = *safe.iter().nth(rng.gen_range(0..safe.len())).expect("index in range");
    match astar(grid, safe, start, goal) {
        Ok(trajectory) if trajectory.length < max_length => Ok(EndpointSample::Accepted {
            start,
            goal,
            trajectory,
        }),
        Ok(trajectory) => Ok(EndpointSample::Rejected {
            start,
            goal,
            reason: EndpointRejection::TooLong {
                length: trajectory.length,
            },
        }),
        Err(PlanError::NotFound { .. }) => Ok(EndpointSample::Rejected {
            start,
            goal,
            reason: EndpointRejection::NotFound,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::CellState;

    #[test]
    fn single_cell_safe_space() {
        let grid = OccupancyGrid::new(4, 4, 0.1, CellState::Free).unwrap();
        let safe = BTreeSet::from([Cell::new(2, 1)]);
        match sample_task_endpoints(&grid, &safe, 9, 20.0).unwrap() {
            EndpointSample::Accepted { start, goal, trajectory } => {
                assert_eq!(start, goal);
                assert_eq!(trajectory.length, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn disjoint_components_rejected() {
        let grid = OccupancyGrid::from_rows(&[".#.", ".#.", ".#."], 0.1).unwrap();
        let safe = BTreeSet::from([Cell::new(0, 0), Cell::new(2, 2)]);
        let mut saw_reject = false;
        for seed in 0..32 {
            if let EndpointSample::Rejected { start, goal, reason } =
                sample_task_endpoints(&grid, &safe, seed, 20.0).unwrap()
            {
                assert_ne!(start, goal);
                assert_eq!(reason, EndpointRejection::NotFound);
                saw_reject = true;
            }
        }
        assert!(saw_reject);
    }

    #[test]
    fn empty_safe_space() {
        let grid = OccupancyGrid::new(4, 4, 0.1, CellState::Free).unwrap();
        assert!(matches!(
            sample_task_endpoints(&grid, &BTreeSet::new(), 0, 20.0),
            Err(PlanError::EmptySafeSpace)
        ));
    }

    #[test]
    fn length_filter() {
        let grid = OccupancyGrid::new(40, 2, 1.0, CellState::Free).unwrap();
        let safe: BTreeSet<Cell> = grid.cells_with(CellState::Free).collect();
        for seed in 0..50 {
            match sample_task_endpoints(&grid, &safe, seed, 5.0).unwrap() {
                EndpointSample::Accepted { trajectory, .. } => assert!(trajectory.length < 5.0),
                EndpointSample::Rejected { reason, .. } => {
                    assert!(matches!(reason, EndpointRejection::TooLong { length } if length >= 5.0))
                }
            }
        }
    }
}
