use serde::{Deserialize, Serialize};

use super::grid::GridSpec;

/// Declared frequency support of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Support {
    /// Closed shell `r_in <= |xi| <= r_out`.
    Annulus { r_in: f64, r_out: f64 },
    /// Closed axis-aligned box.
    Box { center: [f64; 2], half: [f64; 2] },
}

impl Support {
    /// The annulus A(1).
    pub fn unit_annulus() -> Self {
        Support::Annulus { r_in: 0.5, r_out: 1.0 }
    }

    pub fn dilate(&self, delta: f64) -> Self {
        match *self {
            Support::Annulus { r_in, r_out } => Support::Annulus {
                r_in: (r_in - delta).max(0.0),
                r_out: r_out + delta,
            },
            Support::Box { center, half } => Support::Box {
                center,
                half: [half[0] + delta, half[1] + delta],
            },
        }
    }

    pub fn contains(&self, xi: [f64; 2]) -> bool {
        match *self {
            Support::Annulus { r_in, r_out } => {
                let r = xi[0].hypot(xi[1]);
                r >= r_in && r <= r_out
            }
            Support::Box { center, half } => {
                (xi[0] - center[0]).abs() <= half[0] && (xi[1] - center[1]).abs() <= half[1]
            }
        }
    }

    /// `[lo1, hi1, lo2, hi2]` bounding box.
    pub fn bounding_box(&self) -> [f64; 4] {
        match *self {
            Support::Annulus { r_out, .. } => [-r_out, r_out, -r_out, r_out],
            Support::Box { center, half } => [
                center[0] - half[0],
                center[0] + half[0],
                center[1] - half[1],
                center[1] + half[1],
            ],
        }
    }

    /// Whether every point of the support is a representable mode region.
    pub fn fits_band(&self, grid: &GridSpec) -> bool {
        let b = self.bounding_box();
        let lo = -grid.band_edge();
        let hi = grid.max_positive_xi();
        b[0] >= lo && b[2] >= lo && b[1] <= hi && b[3] <= hi
    }
}
