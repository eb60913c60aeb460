//! Time-block pieces `f_j = chi_N * e^{i t_j Delta} f`, the domination and
//! orthogonality checks, and the short/long-time and local/global
//! experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_core::{
    forward_ft, sample_bump, Ball, BumpProfile, Complex64, FrequencyField, SpacetimeRegion, Spatial, Support,
    DEFAULT_DT,
};
use crate::mixed_norms::run;
use crate::propagator::eval::SplitMax;
use crate::propagator::{evolve, evaluate, Backend, PointSet, Reducer, Source};

/// Frequency dilation of the pieces, in units of `1/N`.
pub const TRUNCATION_DILATION: f64 = 8.0;
/// Largest admissible relative mass removed by the frequency re-truncation.
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBlock {
    pub j: usize,
    pub t_j: f64,
    /// `[t_j - N, t_j]`.
    pub interval: [f64; 2],
    pub piece: FrequencyField,
    pub piece_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBlockDecomposition {
    pub scale: f64,
    pub blocks: Vec<TimeBlock>,
    /// Worst per-block squared mass removed by the re-truncation, relative to `||f||^2`.
    pub truncation_loss: f64,
    /// `sum_j ||f_j||^2 / ||f||^2` (0 for the zero field).
    pub orthogonality: f64,
    /// Pieces are kept on `A(1)` dilated by this amount.
    pub dilation: f64,
}

fn check_scale(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("scale N must be positive".into()));
    }
    Ok(n as f64)
}

fn check_annulus(fh: &FrequencyField) -> Result<()> {
    let out = fh.mass_outside(&Support::unit_annulus());
    if out > 1e-10 {
        return Err(Error::Support(format!("{out:e} of the squared mass lies outside A(1)")));
    }
    Ok(())
}

pub fn build_time_blocks(fh: &FrequencyField, n: usize) -> Result<TimeBlockDecomposition> {
    build_time_blocks_with(fh, n, &BumpProfile::chi(n as f64))
}

/// Same construction with an arbitrary spatial cutoff (used for ablations).
pub fn build_time_blocks_with(fh: &FrequencyField, n: usize, cutoff: &BumpProfile) -> Result<TimeBlockDecomposition> {
    let nf = check_scale(n)?;
    check_annulus(fh)?;
    let grid = *fh.grid();
    let dilation = TRUNCATION_DILATION / nf;
    let keep = Support::unit_annulus().dilate(dilation);
    let declared = keep.fits_band(&grid).then_some(keep);
    let chi = sample_bump(cutoff, &grid);
    let total = fh.hat_norm().powi(2);

    let built: Vec<Result<(TimeBlock, f64)>> = (1..=n)
        .into_par_iter()
        .map(|j| {
            let t_j = j as f64 * nf;
            let u = evolve(fh, t_j)?.mul_pointwise(&chi)?;
            let mut values = forward_ft(&u).into_values();
            let d = grid.dxi();
            let mut removed = 0.0;
            for (idx, v) in values.iter_mut().enumerate() {
                let xi = [grid.xi(idx / grid.n()), grid.xi(idx % grid.n())];
                if !keep.contains(xi) {
                    removed += v.norm_sqr() * d * d;
                    *v = Complex64::new(0.0, 0.0);
                }
            }
            let piece = FrequencyField::new(grid, values, declared)?;
            let loss = if total > 0.0 { removed / total } else { 0.0 };
            let piece_norm = piece.l2_norm();
            Ok((
                TimeBlock { j, t_j, interval: [t_j - nf, t_j], piece, piece_norm },
                loss,
            ))
        })
        .collect();

    let mut blocks = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for b in built {
        let (blk, loss) = b?;
        worst = worst.max(loss);
        blocks.push(blk);
    }
    if worst > TRUNCATION_TOL {
        return Err(Error::Accuracy {
            msg: format!("frequency re-truncation removed {worst:e} of the mass"),
            last: worst,
            previous: TRUNCATION_TOL,
        });
    }
    let norm2 = fh.l2_norm().powi(2);
    let orthogonality = if norm2 > 0.0 {
        blocks.iter().map(|b| b.piece_norm.powi(2)).sum::<f64>() / norm2
    } else {
        0.0
    };
    Ok(TimeBlockDecomposition { scale: nf, blocks, truncation_loss: worst, orthogonality, dilation })
}

/// JSON record of a decomposition without the pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBlockReport {
    pub scale: f64,
    pub blocks: usize,
    pub piece_norms: Vec<f64>,
    pub truncation_loss: f64,
    pub orthogonality: f64,
    pub dilation: f64,
}

impl TimeBlockDecomposition {
    pub fn report(&self) -> TimeBlockReport {
        TimeBlockReport {
            scale: self.scale,
            blocks: self.blocks.len(),
            piece_norms: self.blocks.iter().map(|b| b.piece_norm).collect(),
            truncation_loss: self.truncation_loss,
            orthogonality: self.orthogonality,
            dilation: self.dilation,
        }
    }

    /// Checks that the intervals tile `[0, N^2]`, meeting only at endpoints.
    pub fn tiles(&self) -> bool {
        let n = self.scale;
        self.blocks.len() as f64 == n
            && self.blocks.first().is_some_and(|b| b.interval[0] == 0.0)
            && self.blocks.last().is_some_and(|b| b.interval[1] == n * n)
            && self.blocks.windows(2).all(|w| w[0].interval[1] == w[1].interval[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub scale: f64,
    /// `max (|e^{itDelta} f| - |e^{i(t-t_j)Delta} f_j|)_+ / ||f||_2`.
    pub defect: f64,
    pub per_block: Vec<f64>,
    pub dt: f64,
    pub points: usize,
}

struct Defect;

impl Reducer for Defect {
    type State = f64;
    fn init(&self) -> f64 {
        0.0
    }
    fn update(&self, st: &mut f64, _k: usize, _t: f64, _w: f64, u: &[Complex64]) {
        *st = st.max(u[0].norm() - u[1].norm());
    }
}

/// Samples `|x| <= N`, `t in I_j` at the default step.
pub fn domination_check(fh: &FrequencyField, decomp: &TimeBlockDecomposition) -> Result<DominationReport> {
    domination_check_dt(fh, decomp, DEFAULT_DT)
}

pub fn domination_check_dt(fh: &FrequencyField, decomp: &TimeBlockDecomposition, dt: f64) -> Result<DominationReport> {
    let nf = decomp.scale;
    let grid = *fh.grid();
    let ball = Ball::origin(nf)?;
    let pts = PointSet::new(grid, SpacetimeRegion::new(Spatial::Ball(ball), 0.0, 0.0, dt)?.nodes(&grid)?);
    let norm = fh.l2_norm();
    let mut per_block = Vec::with_capacity(decomp.blocks.len());
    for b in &decomp.blocks {
        let times = SpacetimeRegion::new(Spatial::Ball(ball), b.interval[0], b.interval[1], dt)?.time_grid();
        let st = evaluate(
            &[Source::new(fh), Source::shifted(&b.piece, -b.t_j)],
            &pts,
            &times,
            &Defect,
            Backend::Auto,
        )?;
        let worst = st.into_iter().fold(0.0f64, f64::max);
        per_block.push(if norm > 0.0 { worst / norm } else { 0.0 });
    }
    let defect = per_block.iter().copied().fold(0.0, f64::max);
    Ok(DominationReport { scale: nf, defect, per_block, dt, points: pts.len() })
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(Error::UndefinedRatio(format!("denominator {den} in {num}/{den}")));
    }
    Ok(num / den)
}

/// `||sup_{t <= N^2}|u|||_{L^2(B(0,N))} / ||sup_{t <= N}|u|||_{L^2(B(0,N))}`.
pub fn short_to_long_time_ratio(fh: &FrequencyField, n: usize) -> Result<f64> {
    short_to_long_time_ratio_dt(fh, n, DEFAULT_DT)
}

pub fn short_to_long_time_ratio_dt(fh: &FrequencyField, n: usize, dt: f64) -> Result<f64> {
    let (short, long) = short_long_norms(fh, n, dt)?;
    ratio(long, short)
}

/// The two maximal norms behind [`short_to_long_time_ratio`]: `(t <= N, t <= N^2)`.
pub fn short_long_norms(fh: &FrequencyField, n: usize, dt: f64) -> Result<(f64, f64)> {
    let nf = check_scale(n)?;
    check_annulus(fh)?;
    let region = SpacetimeRegion::ball([0.0, 0.0], nf, 0.0, nf * nf, dt)?;
    crate::mixed_norms::split_maximal_norms(fh, &region, nf)
}

/// Ratio of the short-time maximal norm on `B(0, lambda N)` to the one on `B(0, N)`.
pub fn wide_ball_ratio(fh: &FrequencyField, n: usize, lambda: u32) -> Result<f64> {
    wide_ball_ratio_dt(fh, n, lambda, DEFAULT_DT)
}

pub fn wide_ball_ratio_dt(fh: &FrequencyField, n: usize, lambda: u32, dt: f64) -> Result<f64> {
    let (outer, inner) = wide_ball_norms(fh, n, lambda, dt)?;
    ratio(outer, inner)
}

/// The two norms behind [`wide_ball_ratio`]: `(B(0, lambda N), B(0, N))`.
pub fn wide_ball_norms(fh: &FrequencyField, n: usize, lambda: u32, dt: f64) -> Result<(f64, f64)> {
    let nf = check_scale(n)?;
    if lambda != 2 && lambda != 4 {
        return Err(Error::Argument(format!("ball dilation must be 2 or 4, got {lambda}")));
    }
    check_annulus(fh)?;
    let wide = lambda as f64 * nf;
    // waves with |xi| <= 1 travel at most 2N in time N
    if wide + 2.0 * nf > 0.5 * fh.grid().l() {
        return Err(Error::Domain(format!(
            "ball radius {wide} plus travel {} exceeds half the cell {}",
            2.0 * nf,
            0.5 * fh.grid().l()
        )));
    }
    let region = SpacetimeRegion::ball([0.0, 0.0], wide, 0.0, nf, dt)?;
    let mf = crate::mixed_norms::maximal_function_with(fh, &region, Backend::Auto)?;
    Ok((mf.restricted_l2(&Ball::origin(wide)?)?, mf.restricted_l2(&Ball::origin(nf)?)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalGlobal {
    pub scale: f64,
    /// `||sup_{t <= N}|u|||_{L^2(B(0,N))}`.
    pub local: f64,
    /// `||sup_{t <= N^2}|u|||_{L^2(cell)}`.
    pub global: f64,
}

pub fn local_global_experiment(fh: &FrequencyField, n: usize) -> Result<LocalGlobal> {
    local_global_experiment_dt(fh, n, DEFAULT_DT)
}

pub fn local_global_experiment_dt(fh: &FrequencyField, n: usize, dt: f64) -> Result<LocalGlobal> {
    let nf = check_scale(n)?;
    check_annulus(fh)?;
    let norm = fh.l2_norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("data must have unit norm, got {norm}")));
    }
    let grid = *fh.grid();
    let ball = Ball::origin(nf)?;
    if !ball.fits(&grid) {
        return Err(Error::Domain(format!("B(0, {nf}) exceeds the cell")));
    }
    let region = SpacetimeRegion::new(Spatial::All, 0.0, nf * nf, dt)?;
    let (pts, st) = run(&[Source::new(fh)], &region, &SplitMax { split: nf }, Backend::Auto)?;
    let h2 = grid.h().powi(2);
    let n_ = grid.n();
    let mut local = 0.0;
    let mut global = 0.0;
    for (&idx, s) in pts.nodes.iter().zip(&st) {
        global += s.1 * s.1;
        if ball.contains([grid.x(idx / n_), grid.x(idx % n_)]) {
            local += s.0 * s.0;
        }
    }
    Ok(LocalGlobal { scale: nf, local: (local * h2).sqrt(), global: (global * h2).sqrt() })
}
