use serde::{Deserialize, Serialize};

use super::fields::SpatialField;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Default temporal sampling step.
pub const DEFAULT_DT: f64 = 0.125;
/// Largest admissible temporal step for annulus data.
pub const MAX_DT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn origin(radius: f64) -> Result<Self> {
        Self::new([0.0, 0.0], radius)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1]) <= self.radius
    }

    /// Whether the ball stays inside the periodic cell.
    pub fn fits(&self, grid: &GridSpec) -> bool {
        let half = 0.5 * grid.l();
        self.center.iter().all(|c| c.abs() + self.radius <= half + 1e-12)
    }

    /// Row-major node indices inside the ball, boundary included.
    pub fn nodes(&self, grid: &GridSpec) -> Vec<usize> {
        let n = grid.n();
        (0..n * n).filter(|&idx| self.contains([grid.x(idx / n), grid.x(idx % n)])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spatial {
    Ball(Ball),
    All,
}

/// Spatial part, time interval `[t0, t1]` and sampling step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeRegion {
    pub spatial: Spatial,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl SpacetimeRegion {
    pub fn new(spatial: Spatial, t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
            return Err(Error::Argument(format!("time interval [{t0}, {t1}] is empty or not finite")));
        }
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::Argument(format!("time step {dt} must lie in (0, {MAX_DT}]")));
        }
        if let Spatial::Ball(b) = spatial {
            Ball::new(b.center, b.radius)?;
        }
        Ok(SpacetimeRegion { spatial, t0, t1, dt })
    }

    /// `B(0, N) x [N/2, N]`.
    pub fn q_box(n: f64, dt: f64) -> Result<Self> {
        Self::new(Spatial::Ball(Ball::origin(n)?), 0.5 * n, n, dt)
    }

    /// `B(center, radius) x [t0, t1]`.
    pub fn ball(center: [f64; 2], radius: f64, t0: f64, t1: f64, dt: f64) -> Result<Self> {
        Self::new(Spatial::Ball(Ball::new(center, radius)?), t0, t1, dt)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        Self::new(self.spatial, self.t0, self.t1, dt)
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::new(self.t0, self.t1, self.dt)
    }

    /// Node indices covered by the spatial part.
    pub fn nodes(&self, grid: &GridSpec) -> Result<Vec<usize>> {
        match self.spatial {
            Spatial::All => Ok((0..grid.len()).collect()),
            Spatial::Ball(b) => {
                if !b.fits(grid) {
                    return Err(Error::Domain(format!(
                        "ball of radius {} at {:?} exceeds the cell of side {}",
                        b.radius,
                        b.center,
                        grid.l()
                    )));
                }
                Ok(b.nodes(grid))
            }
        }
    }
}

/// Uniform samples `t0 + k dt'` covering `[t0, t1]` with `dt' <= dt`,
/// trapezoid weights (half weight at the endpoints).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Self {
        let span = t1 - t0;
        if span <= 0.0 {
            return TimeGrid { t0, step: dt, count: 1 };
        }
        let k = (span / dt - 1e-9).ceil().max(1.0) as usize;
        TimeGrid { t0, step: span / k as f64, count: k + 1 }
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.step
    }

    pub fn weight(&self, k: usize) -> f64 {
        if self.count == 1 {
            1.0
        } else if k == 0 || k + 1 == self.count {
            0.5 * self.step
        } else {
            self.step
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t(k)).collect()
    }
}

/// `(sum_{x in ball} |f(x)|^2 h^2)^(1/2)`.
pub fn restricted_l2_norm(f: &SpatialField, ball: &Ball) -> Result<f64> {
    let g = f.grid();
    if !ball.fits(g) {
        return Err(Error::Domain(format!(
            "ball of radius {} at {:?} exceeds the cell of side {}",
            ball.radius,
            ball.center,
            g.l()
        )));
    }
    let h2 = g.h().powi(2);
    let s: f64 = ball.nodes(g).iter().map(|&i| f.values()[i].norm_sqr()).sum();
    Ok((s * h2).sqrt())
}
