use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square periodic cell `[-L/2, L/2)^2` sampled at `n` points per axis.
///
/// Spatial node `j` sits at `-L/2 + j*h`. Frequency arrays are stored in
/// FFT order: storage index `k` holds the mode `m = k` for `k < n/2` and
/// `m = k - n` otherwise, at `xi = m * dxi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    l: f64,
    n: usize,
}

pub const MIN_SCALE: u32 = 8;
pub const MAX_SCALE: u32 = 256;

impl GridSpec {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Structural(format!("period must be positive, got {l}")));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::Structural(format!("samples per axis must be even and >= 16, got {n}")));
        }
        Ok(GridSpec { l, n })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Largest representable |xi_i|, i.e. `(2pi/L)(n/2)`.
    pub fn band_edge(&self) -> f64 {
        self.dxi() * (self.n / 2) as f64
    }

    /// Largest positive mode actually stored on each axis.
    pub fn max_positive_xi(&self) -> f64 {
        self.dxi() * (self.n / 2 - 1) as f64
    }

    pub fn contains_annulus(&self) -> bool {
        self.max_positive_xi() > 1.0
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.l + j as f64 * self.h()
    }

    pub fn mode(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.mode(k) as f64 * self.dxi()
    }

    /// Storage index of signed mode `m`.
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m >= -half && m < half {
            Some(m.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    /// Spatial node index closest to `x`, if `x` lies on the grid.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let r = (x + 0.5 * self.l) / self.h();
        let j = r.round();
        if (r - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.n {
            Some(j as usize)
        } else {
            None
        }
    }
}

/// Grid used for experiments at scale `N`: `L = 16N`, `n = 8N`.
pub fn make_grid(scale: u32) -> Result<GridSpec> {
    if !(MIN_SCALE..=MAX_SCALE).contains(&scale) || !scale.is_power_of_two() {
        return Err(Error::Range(format!(
            "scale {scale} must be a power of two in [{MIN_SCALE}, {MAX_SCALE}]"
        )));
    }
    let n = (8 * scale as usize).next_power_of_two();
    GridSpec::new(16.0 * scale as f64, n)
}
