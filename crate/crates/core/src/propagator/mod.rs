//! The free Schrodinger evolution, its kernel and its symmetries.

pub mod eval;
pub mod evolve;
pub mod kernel;
pub mod symmetry;

pub use eval::{evaluate, estimate_cost, Backend, CostEstimate, PointSet, Reducer, Source};
pub use evolve::{apply_multiplier, evolve, evolve_oracle, ORACLE_MAX_N};
pub use kernel::{kernel_decay_check, kernel_eval, radial_argmax, KernelDecayReport, KernelSample};
pub use symmetry::{galilean_boost, parabolic_rescale, translate_spacetime};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field_core::transform::plan;
use crate::field_core::{smooth_step, Complex64, FrequencyField, TimeGrid};

/// Fraction of the temporal spectral energy of `t -> e^{itDelta} f(x0)`,
/// `t in [0, span]`, that falls in `[lo, hi]` (angular frequency).
///
/// The series is tapered with a smooth window so that leakage decays fast.
pub fn temporal_band_fraction(fh: &FrequencyField, node: usize, span: f64, dt: f64, band: [f64; 2]) -> Result<f64> {
    if !(span > 0.0 && dt > 0.0 && dt < PI / 2.0) {
        return Err(Error::Argument(format!("bad temporal sampling span={span}, dt={dt}")));
    }
    let times = TimeGrid::new(0.0, span, dt);
    let pts = PointSet::new(*fh.grid(), vec![node]);
    let rec = evaluate(&[Source::new(fh)], &pts, &times, &eval::Recorder, Backend::Chirp)?;
    let series = &rec[0];
    let k = series.len();
    let m = (4 * k).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (i, v) in series.iter().enumerate() {
        // bump window: 1 in the middle, smooth fall to 0 at both ends
        let s = 2.0 * i as f64 / (k - 1) as f64 - 1.0;
        let w = smooth_step(2.0 * s.abs() - 1.0);
        buf[i] = v[0] * w;
    }
    // e^{+i tau t} peaks at bin tau dt m / 2pi of the forward transform
    plan(m, false).process(&mut buf);
    let step = times.step;
    let (mut inside, mut total) = (0.0, 0.0);
    for (j, v) in buf.iter().enumerate() {
        let jj = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
        let tau = 2.0 * PI * jj / (m as f64 * step);
        let e = v.norm_sqr();
        total += e;
        if tau >= band[0] && tau <= band[1] {
            inside += e;
        }
    }
    if total == 0.0 {
        return Err(Error::UndefinedRatio("zero time series".into()));
    }
    Ok(inside / total)
}
