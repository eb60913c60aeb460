use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fields::SpatialField;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Steepness of the transition profile.
const STEEPNESS: f64 = 2.0;

fn g(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-STEEPNESS / u).exp()
    }
}

/// C-infinity step on `[-1, 1]`: 1 for `s <= -1`, 0 for `s >= 1`, and
/// `step(s) + step(-s) = 1` everywhere.
pub fn smooth_step(s: f64) -> f64 {
    if s <= -1.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = g(1.0 - s);
        a / (a + g(1.0 + s))
    }
}

/// 1 for `d <= 0`, 0 for `d >= width`.
pub fn edge(d: f64, width: f64) -> f64 {
    if width <= 0.0 {
        return if d <= 0.0 { 1.0 } else { 0.0 };
    }
    smooth_step(2.0 * d / width - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpKind {
    TensorFejer,
    SmoothedIndicator,
    RawIndicator,
}

/// Core region of an indicator-type bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Box { center: [f64; 2], half: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], r_in: f64, r_out: f64 },
}

/// A cutoff function on the plane.
///
/// Indicator kinds equal 1 on the core shape and (when smoothed) fall to 0
/// within `width` outside it. The tensor-Fejer kind is
/// `prod_i eta1((x_i - c_i) / s_i)` where `eta1` has Fourier transform
/// supported in `[-1/2, 1/2]`, so its translates over `s Z^2` sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub kind: BumpKind,
    pub shape: Shape,
    pub width: f64,
}

/// Half-width of the Fejer triangle in frequency.
pub const FEJER_A: f64 = 0.5;

/// `eta1(x) = (a / 2pi) sinc^2(a x / 2)`, integral 1.
pub fn fejer1(x: f64) -> f64 {
    let u = 0.5 * FEJER_A * x;
    if u.abs() < 1e-8 {
        FEJER_A / (2.0 * PI) * (1.0 - u * u / 3.0)
    } else {
        FEJER_A / (2.0 * PI) * (u.sin() / u).powi(2)
    }
}

/// `edge` for each coordinate of a box.
fn box_value(x: [f64; 2], c: [f64; 2], half: [f64; 2], w: f64) -> f64 {
    edge((x[0] - c[0]).abs() - half[0], w) * edge((x[1] - c[1]).abs() - half[1], w)
}

impl BumpProfile {
    /// Box-shaped bump of half-sides `scale`; smoothing width defaults to a
    /// quarter of the smaller half-side.
    pub fn build(kind: BumpKind, center: [f64; 2], scale: [f64; 2]) -> Result<Self> {
        if !(scale[0] > 0.0 && scale[1] > 0.0) {
            return Err(Error::Argument(format!("bump scale must be positive, got {scale:?}")));
        }
        let width = match kind {
            BumpKind::SmoothedIndicator => 0.25 * scale[0].min(scale[1]),
            _ => 0.0,
        };
        Ok(BumpProfile { kind, shape: Shape::Box { center, half: scale }, width })
    }

    pub fn smoothed(shape: Shape, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Argument(format!("smoothing width must be positive, got {width}")));
        }
        Ok(BumpProfile { kind: BumpKind::SmoothedIndicator, shape, width })
    }

    pub fn raw(shape: Shape) -> Self {
        BumpProfile { kind: BumpKind::RawIndicator, shape, width: 0.0 }
    }

    /// `rho`: 1 on `1/2 <= |xi| <= 1`, 0 outside `0.4 <= |xi| <= 1.1`.
    pub fn rho() -> Self {
        BumpProfile {
            kind: BumpKind::SmoothedIndicator,
            shape: Shape::Annulus { center: [0.0, 0.0], r_in: 0.5, r_out: 1.0 },
            width: 0.1,
        }
    }

    /// `chi_N`: 1 for `|y| <= 4N`, 0 for `|y| >= 6N`.
    pub fn chi(n: f64) -> Self {
        BumpProfile {
            kind: BumpKind::SmoothedIndicator,
            shape: Shape::Disk { center: [0.0, 0.0], radius: 4.0 * n },
            width: 2.0 * n,
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let w = if self.kind == BumpKind::RawIndicator { 0.0 } else { self.width };
        match (self.kind, self.shape) {
            (BumpKind::TensorFejer, Shape::Box { center, half }) => {
                fejer1((x[0] - center[0]) / half[0]) * fejer1((x[1] - center[1]) / half[1])
            }
            (BumpKind::TensorFejer, _) => f64::NAN,
            (_, Shape::Box { center, half }) => box_value(x, center, half, w),
            (_, Shape::Disk { center, radius }) => {
                edge((x[0] - center[0]).hypot(x[1] - center[1]) - radius, w)
            }
            (_, Shape::Annulus { center, r_in, r_out }) => {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                edge(r_in - r, w) * edge(r - r_out, w)
            }
        }
    }

    /// Radius beyond which an indicator-type bump vanishes, measured from
    /// its center along the worst direction.
    pub fn outer_extent(&self) -> f64 {
        match self.shape {
            Shape::Box { half, .. } => (half[0] + self.width).hypot(half[1] + self.width),
            Shape::Disk { radius, .. } => radius + self.width,
            Shape::Annulus { r_out, .. } => r_out + self.width,
        }
    }

    /// Total integral, used for `K(0,0)` and trivial kernel bounds.
    pub fn integral_abs(&self, samples: usize) -> f64 {
        match self.shape {
            Shape::Annulus { r_in, r_out, .. } => {
                let lo = (r_in - self.width).max(0.0);
                let hi = r_out + self.width;
                let dr = (hi - lo) / samples as f64;
                (0..samples)
                    .map(|i| {
                        let r = lo + (i as f64 + 0.5) * dr;
                        2.0 * PI * r * self.eval([r, 0.0]).abs() * dr
                    })
                    .sum()
            }
            _ => {
                let e = self.outer_extent();
                let (c, d) = match self.shape {
                    Shape::Box { center, .. } | Shape::Disk { center, .. } => (center, 2.0 * e / samples as f64),
                    Shape::Annulus { .. } => unreachable!(),
                };
                let mut s = 0.0;
                for i in 0..samples {
                    for j in 0..samples {
                        let x = [c[0] - e + (i as f64 + 0.5) * d, c[1] - e + (j as f64 + 0.5) * d];
                        s += self.eval(x).abs();
                    }
                }
                s * d * d
            }
        }
    }
}

/// Samples a bump on the spatial nodes of a grid.
pub fn sample_bump(profile: &BumpProfile, grid: &GridSpec) -> SpatialField {
    let n = grid.n();
    let values = (0..n * n)
        .map(|idx| Complex64::new(profile.eval([grid.x(idx / n), grid.x(idx % n)]), 0.0))
        .collect();
    SpatialField::from_raw(*grid, values)
}

/// Samples a bump on the frequency nodes of a grid (FFT order).
pub fn sample_bump_freq(profile: &BumpProfile, grid: &GridSpec) -> Vec<f64> {
    let n = grid.n();
    (0..n * n).map(|idx| profile.eval([grid.xi(idx / n), grid.xi(idx % n)])).collect()
}

/// Trigamma `psi_1(z) = sum_{k>=0} 1/(z+k)^2` via recurrence and asymptotics.
fn trigamma(mut z: f64) -> f64 {
    let mut acc = 0.0;
    while z < 20.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let z2 = 1.0 / (z * z);
    acc + 1.0 / z
        + 0.5 * z2
        + (1.0 / z) * z2 * (1.0 / 6.0 - z2 * (1.0 / 30.0 - z2 * (1.0 / 42.0 - z2 * (1.0 / 30.0))))
}

/// `sum_{k in Z} eta1(x - k)` evaluated numerically without Poisson summation.
///
/// `eta1(u) = (1 - cos(a u)) / (pi a u^2)`. Terms with `|k| <= 64` are summed
/// directly; the tail of `1/u^2` uses the trigamma function and the
/// oscillating tail `cos(a u)/u^2` is summed under a smooth cutoff.
pub fn fejer_lattice_sum_1d(x: f64) -> f64 {
    const NEAR: i64 = 64;
    const FAR: i64 = 40_000;
    let a = FEJER_A;
    let c = 1.0 / (PI * a);
    let k0 = x.floor() as i64;
    let mut near = 0.0;
    for k in (k0 - NEAR)..=(k0 + NEAR) {
        near += fejer1(x - k as f64);
    }
    let lo = (k0 - NEAR) as f64;
    let hi = (k0 + NEAR) as f64;
    // sum over k > hi of 1/(k-x)^2 and over k < lo of 1/(x-k)^2
    let smooth_tail = trigamma(hi + 1.0 - x) + trigamma(x - lo + 1.0);
    let mut osc = 0.0;
    for m in (NEAR + 1)..(2 * FAR) {
        let w = edge(m as f64 - FAR as f64, FAR as f64);
        if w == 0.0 {
            break;
        }
        for k in [k0 + m, k0 - m] {
            let u = x - k as f64;
            osc += w * (a * u).cos() / (u * u);
        }
    }
    near + c * (smooth_tail - osc)
}

/// `sum_{k in Z^2} eta(x - k)` for the unit tensor-Fejer bump.
pub fn fejer_lattice_sum(x: [f64; 2]) -> f64 {
    fejer_lattice_sum_1d(x[0]) * fejer_lattice_sum_1d(x[1])
}
