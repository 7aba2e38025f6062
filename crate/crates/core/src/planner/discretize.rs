use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::{
    objects_in, visible_cells, Cell, OccupancyGrid, Pose, SceneObject, SensorConfig, VIEW_OFFSETS,
};

use super::{headings_toward_next, PlanError, Trajectory};

/// Upper bound (exclusive) on the number of keypoints.
pub const MAX_KEYPOINTS: usize = 10;

/// An object seen in a view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sighting {
    pub object_id: usize,
    pub label: String,
    pub cell: Cell,
}

/// One simulated camera view: what was visible and which objects were in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewObservation {
    pub heading: f64,
    #[serde(skip)]
    pub cells: BTreeSet<Cell>,
    pub visible_count: usize,
    pub objects: Vec<Sighting>,
}

impl ViewObservation {
    pub fn capture(grid: &OccupancyGrid, objects: &[SceneObject], pose: Pose, sensor: SensorConfig) -> Self {
        let cells = visible_cells(grid, pose, sensor.hfov, sensor.range);
        let objects = objects_in(objects, &cells)
            .into_iter()
            .map(|o| Sighting {
                object_id: o.id,
                label: o.label.clone(),
                cell: o.cell,
            })
            .collect();
        Self {
            heading: pose.theta,
            visible_count: cells.len(),
            cells,
            objects,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.objects.iter().map(|s| s.label.as_str()).collect()
    }
}

/// Forward / left / right views at one keypoint. The forward view is the ground-truth choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationTriplet {
    /// Ordinal of the keypoint along the trajectory.
    pub step: usize,
    /// Index of the keypoint in the trajectory waypoints.
    pub waypoint: usize,
    pub pose: Pose,
    pub forward: ViewObservation,
    pub left: ViewObservation,
    pub right: ViewObservation,
}

impl ObservationTriplet {
    pub fn views(&self) -> [&ViewObservation; 3] {
        [&self.forward, &self.left, &self.right]
    }
}

/// Picks keypoint indices: both endpoints plus 1 to 7 distinct interior waypoints
/// (fewer when the path is short), sorted.
pub fn sample_keypoints(waypoints: usize, rng: &mut impl Rng) -> Vec<usize> {
    if waypoints < 2 {
        return (0..waypoints).collect();
    }
    let interior = waypoints - 2;
    let cap = interior.min(MAX_KEYPOINTS - 3);
    let k = if cap == 0 { 0 } else { rng.gen_range(1..=cap) };
    let mut idx: Vec<usize> = sample(rng, interior, k).into_iter().map(|i| i + 1).collect();
    idx.push(0);
    idx.push(waypoints - 1);
    idx.sort_unstable();
    idx
}

/// Splits a trajectory into keypoints and captures three views at each.
///
/// Headings follow the direction from each keypoint to the next; the final keypoint
/// keeps its predecessor's heading. `traj.keypoints` is filled in.
pub fn discretize(
    grid: &OccupancyGrid,
    traj: &mut Trajectory,
    objects: &[SceneObject],
    sensor: SensorConfig,
    rng_seed: u64,
) -> Result<Vec<ObservationTriplet>, PlanError> {
    if traj.waypoints.len() < 2 {
        return Err(PlanError::TrajectoryTooShort(traj.waypoints.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let keys = sample_keypoints(traj.waypoints.len(), &mut rng);
    let points: Vec<(f64, f64)> = keys.iter().map(|&i| (traj.waypoints[i].x, traj.waypoints[i].y)).collect();
    let headings = headings_toward_next(&points);

    let triplets = keys
        .iter()
        .zip(&headings)
        .enumerate()
        .map(|(step, (&wi, &theta))| {
            let pose = Pose::new(traj.waypoints[wi].x, traj.waypoints[wi].y, theta);
            let [f, l, r] = VIEW_OFFSETS.map(|off| {
                ViewObservation::capture(grid, objects, pose.with_heading(theta + off), sensor)
            });
            ObservationTriplet {
                step,
                waypoint: wi,
                pose,
                forward: f,
                left: l,
                right: r,
            }
        })
        .collect();
    traj.keypoints = keys;
    Ok(triplets)
}
