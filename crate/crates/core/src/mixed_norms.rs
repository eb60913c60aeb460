//! Mixed space-time norms of `F(x,t) = e^{itDelta} f(x)` on sampled boxes.
//!
//! Spatial sums are midpoint sums `h^2 sum_x`, x-outer. Temporal sums use
//! trapezoid weights on the uniform grid of the region. Suprema over `t`
//! are maxima over the samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_core::{Ball, FrequencyField, GridSpec, SpacetimeRegion, Spatial, TimeGrid};
use crate::propagator::eval::{BilinearSq, MaxAbs, PowerSum, SplitMax};
use crate::propagator::{evaluate, Backend, PointSet, Reducer, Source};

/// Pointwise sampled supremum of `|e^{itDelta} f|` over a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalField {
    pub grid: GridSpec,
    /// Row-major; nodes outside the spatial region hold 0.
    pub values: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    pub samples: usize,
}

impl MaximalField {
    /// `(sum_{x in ball} sup_t |F|^2 h^2)^(1/2)`.
    pub fn restricted_l2(&self, ball: &Ball) -> Result<f64> {
        if !ball.fits(&self.grid) {
            return Err(Error::Domain(format!("ball of radius {} exceeds the cell", ball.radius)));
        }
        let h2 = self.grid.h().powi(2);
        Ok((ball.nodes(&self.grid).iter().map(|&i| self.values[i].powi(2)).sum::<f64>() * h2).sqrt())
    }

    /// `L^2` norm over every node of the cell.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.h().powi(2)).sqrt()
    }
}

pub(crate) fn run<R: Reducer>(
    sources: &[Source],
    region: &SpacetimeRegion,
    reducer: &R,
    backend: Backend,
) -> Result<(PointSet, Vec<R::State>)> {
    let grid = *sources[0].field.grid();
    let pts = PointSet::new(grid, region.nodes(&grid)?);
    let states = evaluate(sources, &pts, &region.time_grid(), reducer, backend)?;
    Ok((pts, states))
}

fn h2(f: &FrequencyField) -> f64 {
    f.grid().h().powi(2)
}

pub fn maximal_function(fh: &FrequencyField, region: &SpacetimeRegion) -> Result<MaximalField> {
    maximal_function_with(fh, region, Backend::Auto)
}

pub fn maximal_function_with(fh: &FrequencyField, region: &SpacetimeRegion, backend: Backend) -> Result<MaximalField> {
    if region.t1 <= region.t0 {
        return Err(Error::Argument(format!("empty time range [{}, {}]", region.t0, region.t1)));
    }
    let (pts, st) = run(&[Source::new(fh)], region, &MaxAbs, backend)?;
    let grid = *fh.grid();
    let mut values = vec![0.0; grid.len()];
    for (&idx, v) in pts.nodes.iter().zip(st) {
        values[idx] = v;
    }
    let tg = region.time_grid();
    Ok(MaximalField { grid, values, t0: region.t0, t1: region.t1, step: tg.step, samples: tg.count })
}

/// Restricted `L^2` norms of the sampled suprema over `[t0, split]` and over
/// `[t0, t1]`, both on the region's ball.
pub fn split_maximal_norms(fh: &FrequencyField, region: &SpacetimeRegion, split: f64) -> Result<(f64, f64)> {
    let (_, st) = run(&[Source::new(fh)], region, &SplitMax { split }, Backend::Auto)?;
    let h2 = h2(fh);
    let a = st.iter().map(|s| s.0 * s.0).sum::<f64>() * h2;
    let b = st.iter().map(|s| s.1 * s.1).sum::<f64>() * h2;
    Ok((a.sqrt(), b.sqrt()))
}

/// `(sum_x (sum_t |F|^4 dt)^(1/2) h^2)^(1/2)`.
pub fn l2x_l4t_norm(fh: &FrequencyField, q: &SpacetimeRegion) -> Result<f64> {
    let (_, st) = run(&[Source::new(fh)], q, &PowerSum { p: 4 }, Backend::Auto)?;
    Ok((st.iter().map(|s| s.sqrt()).sum::<f64>() * h2(fh)).sqrt())
}

/// `sum_x (sum_t |F G|^2 dt)^(1/2) h^2`.
pub fn l1x_l2t_bilinear(fh: &FrequencyField, gh: &FrequencyField, region: &SpacetimeRegion) -> Result<f64> {
    l1x_l2t_bilinear_with(fh, gh, region, Backend::Auto)
}

pub fn l1x_l2t_bilinear_with(
    fh: &FrequencyField,
    gh: &FrequencyField,
    region: &SpacetimeRegion,
    backend: Backend,
) -> Result<f64> {
    let (_, st) = run(&[Source::new(fh), Source::new(gh)], region, &BilinearSq, backend)?;
    Ok(st.iter().map(|s| s.sqrt()).sum::<f64>() * h2(fh))
}

/// `(sum_x sum_t |F|^2 dt h^2)^(1/2)`.
pub fn l2xt_norm(fh: &FrequencyField, q: &SpacetimeRegion) -> Result<f64> {
    l2xt_norm_with(fh, q, Backend::Auto)
}

pub fn l2xt_norm_with(fh: &FrequencyField, q: &SpacetimeRegion, backend: Backend) -> Result<f64> {
    let (_, st) = run(&[Source::new(fh)], q, &PowerSum { p: 2 }, backend)?;
    Ok((st.iter().sum::<f64>() * h2(fh)).sqrt())
}

/// `(sum_x sup_t |F|^2 h^2)^(1/2)`. When `cube_radius` is given (data in an
/// `r`-cube), the pairing `r^2 N <= 1` with `N = t1` is enforced.
pub fn l2x_linfty_t(fh: &FrequencyField, q: &SpacetimeRegion, cube_radius: Option<f64>) -> Result<f64> {
    if let Some(r) = cube_radius {
        if r * r * q.t1 > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("r^2 N = {} exceeds 1", r * r * q.t1)));
        }
    }
    let (_, st) = run(&[Source::new(fh)], q, &MaxAbs, Backend::Auto)?;
    Ok((st.iter().map(|s| s * s).sum::<f64>() * h2(fh)).sqrt())
}

/// Time grid used by a region (re-exported for reporting).
pub fn sampling(q: &SpacetimeRegion) -> TimeGrid {
    q.time_grid()
}

/// `B(0, N) x [N/2, N]`.
pub fn q_box(n: f64, dt: f64) -> Result<SpacetimeRegion> {
    SpacetimeRegion::q_box(n, dt)
}

/// All space times `[t0, t1]`.
pub fn all_space(t0: f64, t1: f64, dt: f64) -> Result<SpacetimeRegion> {
    SpacetimeRegion::new(Spatial::All, t0, t1, dt)
}
