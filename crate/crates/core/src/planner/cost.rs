use std::cmp::Ordering;
use std::ops::Add;

/// Path cost on an 8-connected grid, kept as exact step counts.
///
/// The metric value is `straight + diagonal * sqrt(2)` cells. Because sqrt(2) is
/// irrational, two costs are equal only when both counts are equal, and the ordering
/// below is decided in integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub const ZERO: OctileCost = OctileCost {
        straight: 0,
        diagonal: 0,
    };
    pub const STRAIGHT: OctileCost = OctileCost {
        straight: 1,
        diagonal: 0,
    };
    pub const DIAGONAL: OctileCost = OctileCost {
        straight: 0,
        diagonal: 1,
    };

    /// Octile distance between two cells.
    pub fn octile(dx: usize, dy: usize) -> Self {
        let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
        OctileCost {
            straight: (hi - lo) as u32,
            diagonal: lo as u32,
        }
    }

    pub fn cells(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn meters(self, resolution: f64) -> f64 {
        self.cells() * resolution
    }
}

impl Add for OctileCost {
    type Output = OctileCost;

    fn add(self, rhs: Self) -> Self {
        OctileCost {
            straight: self.straight + rhs.straight,
            diagonal: self.diagonal + rhs.diagonal,
        }
    }
}

impl Ord for OctileCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of da + db * sqrt(2)
        let da = self.straight as i64 - other.straight as i64;
        let db = self.diagonal as i64 - other.diagonal as i64;
        match (da.cmp(&0), db.cmp(&0)) {
            (Ordering::Equal, o) | (o, Ordering::Equal) => o,
            (a, b) if a == b => a,
            (a, _) => {
                // opposite signs: compare da^2 with 2 db^2
                let lhs = (da * da) as i128;
                let rhs = 2 * (db * db) as i128;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => a,
                    Ordering::Less => a.reverse(),
                    Ordering::Equal => unreachable!("sqrt(2) is irrational"),
                }
            }
        }
    }
}

impl PartialOrd for OctileCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
