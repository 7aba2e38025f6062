//! Occupancy-grid sandbox: cells, poses, exact distance fields, visibility and maze generation.

mod distance;
mod grid;
mod maze;
mod objects;
mod visibility;

pub use distance::{compute_distance_field, safe_space, DistanceField};
pub use grid::{wrap_angle, Cell, CellState, OccupancyGrid, Pose, DEFAULT_RESOLUTION};
pub use maze::{generate_maze, MazeSpec};
pub use objects::{objects_in, SceneObject};
pub use visibility::{
    in_sensor_cone, line_of_sight, SensorConfig, three_views, visible_cells, DEFAULT_HFOV, DEFAULT_RANGE,
    VIEW_OFFSETS,
};

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("grid must be at least 2x2, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unexpected character {c:?} at row {row}, column {col}")]
    BadChar { row: usize, col: usize, c: char },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "4 3 0.1\n#..#\n.?..\n####\n";
        let grid = OccupancyGrid::parse(text).unwrap();
        assert_eq!(grid.width(), 4);
        assert_eq!(grid.get(Cell::new(1, 1)), CellState::Unknown);
        assert_eq!(grid.to_text(), text);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = OccupancyGrid::parse("3 2 0.1\n...\n..\n").unwrap_err();
        assert!(matches!(err, GridError::RaggedRow { row: 1, expected: 3, found: 2 }));
    }

    #[test]
    fn bad_header_and_chars() {
        assert!(matches!(OccupancyGrid::parse("3 2\n"), Err(GridError::Parse { .. })));
        assert!(matches!(
            OccupancyGrid::parse("2 2 0.1\n.x\n..\n"),
            Err(GridError::BadChar { c: 'x', .. })
        ));
        assert!(matches!(
            OccupancyGrid::parse("1 2 0.1\n.\n.\n"),
            Err(GridError::TooSmall { .. })
        ));
        assert!(matches!(
            OccupancyGrid::parse("2 2 0\n..\n..\n"),
            Err(GridError::BadResolution(_))
        ));
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
