use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_core::{BumpKind, BumpProfile, Complex64, Shape};

/// Relative change between successive refinements accepted as converged.
pub const KERNEL_REL_TOL: f64 = 1e-6;
/// Absolute floor, relative to `int |rho|`, below which values count as settled.
pub const KERNEL_ABS_FLOOR: f64 = 1e-12;
pub const KERNEL_MAX_DOUBLINGS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub x: [f64; 2],
    pub t: f64,
    pub value: [f64; 2],
}

impl KernelSample {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }
}

fn radial_range(rho: &BumpProfile) -> Result<(f64, f64)> {
    if rho.kind == BumpKind::TensorFejer {
        return Err(Error::Argument("kernel cutoff must be compactly supported".into()));
    }
    let w = rho.width;
    Ok(match rho.shape {
        Shape::Annulus { center, r_in, r_out } if center == [0.0, 0.0] => ((r_in - w).max(0.0), r_out + w),
        _ => (0.0, rho.outer_extent() + shape_offset(rho)),
    })
}

fn shape_offset(rho: &BumpProfile) -> f64 {
    match rho.shape {
        Shape::Box { center, .. } | Shape::Disk { center, .. } | Shape::Annulus { center, .. } => {
            center[0].hypot(center[1])
        }
    }
}

/// Polar trapezoid rule with `nr` radial and `nt` angular nodes.
fn polar_sum(x: [f64; 2], t: f64, rho: &BumpProfile, r0: f64, r1: f64, nr: usize, nt: usize) -> Complex64 {
    let dr = (r1 - r0) / nr as f64;
    let dth = 2.0 * PI / nt as f64;
    let angles: Vec<(f64, f64)> = (0..nt).map(|k| (k as f64 * dth).sin_cos()).collect();
    (1..nr)
        .into_par_iter()
        .map(|i| {
            let r = r0 + i as f64 * dr;
            let mut s = Complex64::new(0.0, 0.0);
            for &(sn, cs) in &angles {
                let xi = [r * cs, r * sn];
                let w = rho.eval(xi);
                if w != 0.0 {
                    s += w * Complex64::from_polar(1.0, x[0] * xi[0] + x[1] * xi[1] + t * r * r);
                }
            }
            s * r
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<Complex64>()
        * dr
        * dth
}

/// `K(x,t) = int e^{i x xi + i t |xi|^2} rho(xi) d xi` by adaptive polar
/// quadrature; the mesh is doubled until successive values agree.
pub fn kernel_eval(x: [f64; 2], t: f64, rho: &BumpProfile) -> Result<Complex64> {
    if !(t.is_finite() && x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::Argument("kernel arguments must be finite".into()));
    }
    let (r0, r1) = radial_range(rho)?;
    let floor = KERNEL_ABS_FLOOR * PI * r1 * r1;
    let xr = x[0].hypot(x[1]);
    let mut nt = ((1.2 * r1 * xr) as usize + 48).next_multiple_of(8);
    let mut nr = (((r1 - r0) * (xr + 2.0 * r1 * t.abs()) / PI) as usize + 96).next_multiple_of(8);
    let mut prev = polar_sum(x, t, rho, r0, r1, nr, nt);
    for _ in 0..KERNEL_MAX_DOUBLINGS {
        nt *= 2;
        nr *= 2;
        let cur = polar_sum(x, t, rho, r0, r1, nr, nt);
        let diff = (cur - prev).norm();
        if diff <= KERNEL_REL_TOL * cur.norm() || diff <= floor {
            return Ok(cur);
        }
        prev = cur;
        if nt * nr > 400_000_000 {
            break;
        }
    }
    let last = polar_sum(x, t, rho, r0, r1, nr, nt);
    Err(Error::Accuracy {
        msg: format!("kernel quadrature at x={x:?}, t={t} did not settle"),
        last: last.norm(),
        previous: prev.norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDecayReport {
    pub scale: u32,
    /// `|K(0,0)|`.
    pub k00: f64,
    pub samples: Vec<KernelSample>,
    /// `max |K(z,t)| / |K(0,0)|` over the off-region samples.
    pub max_ratio: f64,
    /// Radius of the largest `|K(z, t_scan)|` on a radial scan.
    pub scan_time: f64,
    pub scan_argmax_radius: f64,
    pub passed: bool,
}

pub const KERNEL_DECAY_LIMIT: f64 = 1e-6;

/// Samples `|K(z, t)|` with `|t| <= N^2` and `|z| >= 10 N^2 + 2|t|`.
///
/// The difference `z = x - y` is what enters the kernel, so sampling `z`
/// on that shell covers every admissible `(x, y)`.
pub fn kernel_decay_check(scale: u32) -> Result<KernelDecayReport> {
    let rho = BumpProfile::rho();
    let n = scale as f64;
    let n2 = n * n;
    let k00 = kernel_eval([0.0, 0.0], 0.0, &rho)?.norm();
    let mut samples = Vec::new();
    for &tf in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
        let t = tf * n2;
        let base = 10.0 * n2 + 2.0 * t.abs();
        for &extra in &[0.0, n, 4.0 * n] {
            for &ang in &[0.3_f64, 2.1] {
                let r = base + extra;
                let z = [r * ang.cos(), r * ang.sin()];
                let v = kernel_eval(z, t, &rho)?;
                samples.push(KernelSample { x: z, t, value: [v.re, v.im] });
            }
        }
    }
    let max_ratio = samples.iter().map(|s| s.value().norm()).fold(0.0, f64::max) / k00;
    let scan_time = 10.0_f64.max(n);
    let scan_argmax_radius = radial_argmax(scan_time, &rho, 4.0 * scan_time, 160)?;
    Ok(KernelDecayReport {
        scale,
        k00,
        samples,
        max_ratio,
        scan_time,
        scan_argmax_radius,
        passed: max_ratio <= KERNEL_DECAY_LIMIT,
    })
}

/// Radius in `[0, r_max]` maximizing `|K(r e1, t)|` on a uniform scan.
pub fn radial_argmax(t: f64, rho: &BumpProfile, r_max: f64, steps: usize) -> Result<f64> {
    let mut best = (0.0, -1.0);
    for i in 0..=steps {
        let r = r_max * i as f64 / steps as f64;
        let v = kernel_eval([r, 0.0], t, rho)?.norm();
        if v > best.1 {
            best = (r, v);
        }
    }
    Ok(best.0)
}
