use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GridError;

/// Default metric size of one cell.
pub const DEFAULT_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Obstacle,
    Unknown,
}

impl CellState {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Obstacle),
            '?' => Some(CellState::Unknown),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            CellState::Free => '.',
            CellState::Obstacle => '#',
            CellState::Unknown => '?',
        }
    }

    /// Obstacle and Unknown cells both stop a line of sight.
    pub fn blocks_sight(self) -> bool {
        !matches!(self, CellState::Free)
    }
}

/// Integer cell coordinate. Ordering is row-major, which matches [`OccupancyGrid::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    pub fn sq_dist(self, other: Cell) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Continuous pose in meters. `theta` is kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }

    pub fn with_heading(self, theta: f64) -> Self {
        Pose::new(self.x, self.y, theta)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    if !theta.is_finite() {
        return theta;
    }
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// 2D occupancy grid. Row `y` of the text format is stored at `cells[y * width ..]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        fill: CellState,
    ) -> Result<Self, GridError> {
        if width < 2 || height < 2 {
            return Err(GridError::TooSmall { width, height });
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::BadResolution(resolution));
        }
        Ok(Self {
            width,
            height,
            resolution,
            cells: vec![fill; width * height],
        })
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        cells: Vec<CellState>,
    ) -> Result<Self, GridError> {
        let mut grid = Self::new(width, height, resolution, CellState::Free)?;
        if cells.len() != width * height {
            return Err(GridError::Parse {
                line: 0,
                msg: format!("expected {} cells, got {}", width * height, cells.len()),
            });
        }
        grid.cells = cells;
        Ok(grid)
    }

    /// Builds a grid from rows of `.`/`#`/`?` characters.
    pub fn from_rows(rows: &[&str], resolution: f64) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0);
        let mut grid = Self::new(width, height, resolution, CellState::Free)?;
        for (y, row) in rows.iter().enumerate() {
            let n = row.chars().count();
            if n != width {
                return Err(GridError::RaggedRow {
                    row: y,
                    expected: width,
                    found: n,
                });
            }
            for (x, c) in row.chars().enumerate() {
                let state = CellState::from_char(c).ok_or(GridError::BadChar { row: y, col: x, c })?;
                grid.cells[y * width + x] = state;
            }
        }
        Ok(grid)
    }

    /// Parses the text format: a `W H RESOLUTION` header line followed by `H` rows of `W` characters.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(GridError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(GridError::Parse {
                line: 1,
                msg: format!("expected `W H RESOLUTION`, got {header:?}"),
            });
        }
        let bad = |what: &str| GridError::Parse {
            line: 1,
            msg: format!("invalid {what} in header {header:?}"),
        };
        let width: usize = parts[0].parse().map_err(|_| bad("width"))?;
        let height: usize = parts[1].parse().map_err(|_| bad("height"))?;
        let resolution: f64 = parts[2].parse().map_err(|_| bad("resolution"))?;
        let mut grid = Self::new(width, height, resolution, CellState::Free)?;

        let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != height {
            return Err(GridError::Parse {
                line: 2,
                msg: format!("expected {height} rows, found {}", rows.len()),
            });
        }
        for (y, row) in rows.iter().enumerate() {
            let row = row.trim_end_matches('\r');
            let n = row.chars().count();
            if n != width {
                return Err(GridError::RaggedRow {
                    row: y,
                    expected: width,
                    found: n,
                });
            }
            for (x, c) in row.chars().enumerate() {
                grid.cells[y * width + x] =
                    CellState::from_char(c).ok_or(GridError::BadChar { row: y, col: x, c })?;
            }
        }
        Ok(grid)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|c| c.to_char()));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    pub fn cell_of_index(&self, idx: usize) -> Cell {
        Cell::new(idx % self.width, idx / self.width)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn get(&self, cell: Cell) -> CellState {
        self.cells[self.index(cell)]
    }

    pub fn try_get(&self, x: i64, y: i64) -> Option<CellState> {
        self.contains(x, y)
            .then(|| self.cells[y as usize * self.width + x as usize])
    }

    pub fn set(&mut self, cell: Cell, state: CellState) {
        let i = self.index(cell);
        self.cells[i] = state;
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.get(cell) == CellState::Free
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cells.len()).map(|i| self.cell_of_index(i))
    }

    pub fn cells_with(&self, state: CellState) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, s)| **s == state)
            .map(|(i, _)| self.cell_of_index(i))
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|s| **s == state).count()
    }

    /// Metric position of a cell center.
    pub fn center(&self, cell: Cell) -> (f64, f64) {
        (
            (cell.x as f64 + 0.5) * self.resolution,
            (cell.y as f64 + 0.5) * self.resolution,
        )
    }

    pub fn pose_at(&self, cell: Cell, theta: f64) -> Pose {
        let (x, y) = self.center(cell);
        Pose::new(x, y, theta)
    }

    /// Cell containing a metric point, if inside the grid.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<Cell> {
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return None;
        }
        let cx = (x / self.resolution).floor() as usize;
        let cy = (y / self.resolution).floor() as usize;
        (cx < self.width && cy < self.height).then_some(Cell::new(cx, cy))
    }

    /// 8-neighbours inside the grid, in a fixed order.
    pub fn neighbors8(&self, cell: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
        const OFFSETS: [(i64, i64); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let nx = cell.x as i64 + dx;
            let ny = cell.y as i64 + dy;
            self.contains(nx, ny)
                .then(|| (Cell::new(nx as usize, ny as usize), dx != 0 && dy != 0))
        })
    }

    pub fn neighbors4(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        const OFFSETS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let nx = cell.x as i64 + dx;
            let ny = cell.y as i64 + dy;
            self.contains(nx, ny)
                .then(|| Cell::new(nx as usize, ny as usize))
        })
    }
}
