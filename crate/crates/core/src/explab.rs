//! Dyadic sweeps, power-law fits and reports.
//!
//! Each experiment builds its input at every scale, evaluates one norm ratio
//! and fits `log ratio = alpha log scale + c` by ordinary least squares.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::examples::{knapp_cap, knapp_cap_at, random_annulus, strip_data, tiny_cap, Edge, StripForm, StripPair};
use crate::field_core::{make_grid, Ball, Complex64, FrequencyField, GridSpec, SpacetimeRegion, Spatial, DEFAULT_DT, MAX_DT, MAX_SCALE};
use crate::localization::{local_global_experiment_dt, short_long_norms, wide_ball_norms};
use crate::mixed_norms::{l1x_l2t_bilinear, l2x_linfty_t, l2xt_norm, maximal_function};
use crate::propagator::translate_spacetime;
use crate::wavepacket::{decompose, mass_within, overlap_norm_check, packet_field, reconstruction_error};
use crate::whitney::{decompose_annulus, default_depth, product_identity, whitney_pairs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    MaximalKnapp,
    L2xtKnapp,
    TinycapSharp,
    BilinearTransverse,
    ShortLongRatio,
    WideBallRatio,
    LocalGlobal,
    WhitneyProduct,
    WavepacketSuite,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::MaximalKnapp,
        ExperimentId::L2xtKnapp,
        ExperimentId::TinycapSharp,
        ExperimentId::BilinearTransverse,
        ExperimentId::ShortLongRatio,
        ExperimentId::WideBallRatio,
        ExperimentId::LocalGlobal,
        ExperimentId::WhitneyProduct,
        ExperimentId::WavepacketSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::MaximalKnapp => "maximal-knapp",
            ExperimentId::L2xtKnapp => "l2xt-knapp",
            ExperimentId::TinycapSharp => "tinycap-sharp",
            ExperimentId::BilinearTransverse => "bilinear-transverse",
            ExperimentId::ShortLongRatio => "short-long-ratio",
            ExperimentId::WideBallRatio => "wide-ball-ratio",
            ExperimentId::LocalGlobal => "local-global",
            ExperimentId::WhitneyProduct => "whitney-product",
            ExperimentId::WavepacketSuite => "wavepacket-suite",
        }
    }

    pub fn reference(&self) -> Reference {
        let (inequality, exponent, kind) = match self {
            ExperimentId::MaximalKnapp => {
                ("||sup_{0<=t<=N} |e^{itD}f|||_{L^2(B(0,N))} <~ N^{1/4} ||f||_2", Some(0.25), ReferenceKind::Sharp)
            }
            ExperimentId::L2xtKnapp => ("||e^{itD}f||_{L^2_{t,x}(Q_R)} <= C R^{1/2} ||f||_2", Some(0.5), ReferenceKind::Sharp),
            ExperimentId::TinycapSharp => (
                "||e^{itD}f||_{L^2_x L^inf_t(Q_N)} <= C r N^{1/2} ||f||_2 for an r-cube with r^2 N <= 1; ratio to r^2 N^{1/2}",
                Some(0.0),
                ReferenceKind::Sharp,
            ),
            ExperimentId::BilinearTransverse => (
                "||e^{itD}f e^{itD}g||_{L^1_x L^2_t(|x|<=R, t~R)} <~ R^{3/4+} ||f||_2 ||g||_2",
                Some(0.75),
                ReferenceKind::UpperBound,
            ),
            ExperimentId::ShortLongRatio => (
                "||sup_{t<=N^2}|e^{itD}f|||_{L^2(B(0,N))} <~ ||sup_{t<=N}|e^{itD}f|||_{L^2(B(0,N))}",
                Some(0.0),
                ReferenceKind::Bounded,
            ),
            ExperimentId::WideBallRatio => (
                "||sup_{t<=N}|e^{itD}f|||_{L^2(B(0,2N))} <~ ||sup_{t<=N}|e^{itD}f|||_{L^2(B(0,N))}",
                Some(0.0),
                ReferenceKind::Bounded,
            ),
            ExperimentId::LocalGlobal => (
                "local bound N^s on B(0,N) x [0,N] gives global bound N^{2s} on R^2 x [0,N^2]",
                None,
                ReferenceKind::Relation,
            ),
            ExperimentId::WhitneyProduct => (
                "u^2 = sum_j sum_{k ~ k'} u^j_k u^j_k' + near-diagonal remainder",
                None,
                ReferenceKind::Identity,
            ),
            ExperimentId::WavepacketSuite => (
                "(sum_T |c_T|^2)^{1/2} <~ ||f||_2 with R^{1/2}-tubes",
                Some(0.0),
                ReferenceKind::Bounded,
            ),
        };
        Reference { inequality: inequality.to_string(), exponent, kind }
    }

    /// Accepted window for every fitted exponent, when the run is judged by one.
    pub fn window(&self) -> Window {
        let w = |lo: Option<f64>, hi: Option<f64>, residual: Option<f64>| Window { lo, hi, residual };
        match self {
            ExperimentId::MaximalKnapp => w(Some(0.17), Some(0.33), Some(0.05)),
            ExperimentId::L2xtKnapp => w(Some(0.42), Some(0.58), Some(0.05)),
            ExperimentId::TinycapSharp => w(Some(-0.15), Some(0.15), None),
            ExperimentId::BilinearTransverse => w(None, Some(0.85), Some(0.05)),
            ExperimentId::ShortLongRatio | ExperimentId::WideBallRatio => w(Some(-0.1), Some(0.2), None),
            ExperimentId::LocalGlobal | ExperimentId::WhitneyProduct | ExperimentId::WavepacketSuite => w(None, None, None),
        }
    }

    pub fn default_scales(&self) -> Vec<u32> {
        match self {
            ExperimentId::MaximalKnapp | ExperimentId::L2xtKnapp | ExperimentId::BilinearTransverse => vec![16, 32, 64, 128],
            ExperimentId::TinycapSharp => vec![16, 64, 256],
            ExperimentId::ShortLongRatio | ExperimentId::WideBallRatio => vec![8, 16, 32, 64],
            ExperimentId::LocalGlobal => vec![8, 16, 32],
            ExperimentId::WhitneyProduct => vec![16, 32, 64],
            ExperimentId::WavepacketSuite => vec![16, 64, 256],
        }
    }

    pub fn smoke_scales(&self) -> Vec<u32> {
        match self {
            ExperimentId::WavepacketSuite | ExperimentId::TinycapSharp => vec![16, 64, 256],
            _ => vec![8, 16, 32].into_iter().filter(|&s| s >= self.min_scale()).chain([64]).take(3).collect(),
        }
    }

    /// Whether scales must be even powers of two (`N^{1/2}` a whole power of two).
    fn square_scales(&self) -> bool {
        matches!(self, ExperimentId::WavepacketSuite | ExperimentId::TinycapSharp)
    }

    fn min_scale(&self) -> u32 {
        match self {
            ExperimentId::WavepacketSuite | ExperimentId::BilinearTransverse | ExperimentId::WhitneyProduct => 16,
            _ => 8,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Proved bound attained by the example, so the exponent should match.
    Sharp,
    /// Proved upper bound; the measurement must not exceed it.
    UpperBound,
    /// The ratio is proved bounded in the scale.
    Bounded,
    /// A relation between two fitted exponents.
    Relation,
    /// An exact identity; no exponent.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub inequality: String,
    pub exponent: Option<f64>,
    pub kind: ReferenceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// Largest accepted log-space RMS residual.
    pub residual: Option<f64>,
}

impl Window {
    pub fn is_open(&self) -> bool {
        self.lo.is_none() && self.hi.is_none() && self.residual.is_none()
    }

    pub fn accepts(&self, fit: &Fit) -> bool {
        self.lo.map_or(true, |lo| fit.alpha >= lo)
            && self.hi.map_or(true, |hi| fit.alpha <= hi)
            && self.residual.map_or(true, |r| fit.residual < r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub scales: Vec<u32>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Time step; the default is 1/8.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    vec![7]
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig { experiment, scales: experiment.default_scales(), seeds: default_seeds(), dt: None, out: None }
    }

    pub fn smoke(experiment: ExperimentId) -> Self {
        ExperimentConfig { scales: experiment.smoke_scales(), ..Self::new(experiment) }
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(DEFAULT_DT)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.len() < 3 {
            return Err(Error::Argument(format!("a fit needs at least 3 scales, got {}", self.scales.len())));
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!("scales {:?} must be strictly increasing", self.scales)));
        }
        for &s in &self.scales {
            if !s.is_power_of_two() || s < self.experiment.min_scale() || s > MAX_SCALE {
                return Err(Error::Argument(format!(
                    "scale {s} must be a power of two in [{}, {MAX_SCALE}]",
                    self.experiment.min_scale()
                )));
            }
            if self.experiment.square_scales() && s.trailing_zeros() % 2 == 1 {
                return Err(Error::Argument(format!("{} needs scales that are powers of 4, got {s}", self.experiment)));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Argument("at least one seed is required".into()));
        }
        let dt = self.dt();
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::Argument(format!("time step {dt} must lie in (0, {MAX_DT}]")));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scale: f64,
    pub lhs: f64,
    pub normalizer: f64,
    pub ratio: f64,
}

impl Record {
    pub fn new(scale: f64, lhs: f64, normalizer: f64) -> Result<Self> {
        if normalizer == 0.0 || !normalizer.is_finite() {
            return Err(Error::UndefinedRatio(format!("normalizer {normalizer} at scale {scale}")));
        }
        Ok(Record { scale, lhs, normalizer, ratio: lhs / normalizer })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub alpha: f64,
    pub intercept: f64,
    /// RMS of the residuals of `log ratio`.
    pub residual: f64,
}

/// Ordinary least squares of `log ratio` on `log scale`.
pub fn fit_exponent(records: &[Record]) -> Result<Fit> {
    if records.len() < 3 {
        return Err(Error::Data(format!("a fit needs at least 3 records, got {}", records.len())));
    }
    for r in records {
        if !(r.ratio > 0.0 && r.ratio.is_finite() && r.scale > 0.0) {
            return Err(Error::Data(format!("ratio {} at scale {} is not positive", r.ratio, r.scale)));
        }
    }
    let n = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.scale.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.ratio.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("all records share one scale".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    Ok(Fit { alpha, intercept, residual: (ss / n).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub records: Vec<Record>,
    pub fit: Fit,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: None, hi: Some(hi), pass: value <= hi }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: None, pass: value >= lo }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: Some(hi), pass: (lo..=hi).contains(&value) }
    }

    pub fn below(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: None, hi: Some(hi), pass: value < hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    pub reference: Reference,
    pub window: Window,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ScalingRun {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

fn series(name: impl Into<String>, records: Vec<Record>, window: &Window) -> Result<Series> {
    let fit = fit_exponent(&records)?;
    Ok(Series { name: name.into(), records, pass: window.accepts(&fit), fit })
}

/// Runs `f` at every scale (concurrently) and annotates errors with the scale.
fn sweep<T: Send>(scales: &[u32], f: impl Fn(u32) -> Result<T> + Sync) -> Result<Vec<T>> {
    scales.par_iter().map(|&s| f(s).map_err(|e| e.at_scale(s as f64))).collect()
}

fn unit(f: FrequencyField) -> FrequencyField {
    let n = f.l2_norm();
    f.scale(Complex64::new(1.0 / n, 0.0))
}

/// Unit-norm cap of side `2/N` at `(3/4, 0)`, focused at `t = N/2`.
///
/// Its coherence time is `N^2`, and it stays inside `A(1)` for every `N >= 8`.
pub fn knapp_family(grid: &GridSpec, n: u32) -> Result<FrequencyField> {
    let nf = n as f64;
    let f = knapp_cap_at(grid, nf * nf, [0.75, 0.0], Edge::Smoothed)?;
    Ok(unit(translate_spacetime(&f, [0.0, 0.0], 0.5 * nf)?))
}

/// Grid with `n` nodes per side and the largest whole-number cell on which
/// `A(1)` is representable.
pub fn whitney_grid(n: u32) -> Result<GridSpec> {
    let l = (2.0 * std::f64::consts::PI * (n as f64 / 2.0 - 1.0)).floor();
    let g = GridSpec::new(l, n as usize)?;
    if !g.contains_annulus() {
        return Err(Error::Resolution(format!("{n} nodes cannot represent A(1)")));
    }
    Ok(g)
}

/// Fixed cell for strip data: frequency spacing below 1/100.
pub fn strip_grid() -> Result<GridSpec> {
    GridSpec::new(1024.0, 512)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ScalingRun> {
    config.validate()?;
    let id = config.experiment;
    let window = id.window();
    let dt = config.dt();
    let scales = &config.scales;
    let seed = config.seeds[0];
    let mut checks = Vec::new();
    let series = match id {
        ExperimentId::MaximalKnapp => {
            let records = sweep(scales, |n| {
                let nf = n as f64;
                let f = knapp_cap(&make_grid(n)?, nf, Edge::Smoothed)?;
                let q = SpacetimeRegion::ball([0.0, 0.0], nf, 0.0, nf, dt)?;
                Record::new(nf, maximal_function(&f, &q)?.restricted_l2(&Ball::origin(nf)?)?, f.l2_norm())
            })?;
            vec![series("knapp", records, &window)?]
        }
        ExperimentId::L2xtKnapp => {
            let records = sweep(scales, |r| {
                let rf = r as f64;
                let f = knapp_cap(&make_grid(r)?, rf, Edge::Smoothed)?;
                let focused = translate_spacetime(&f, [0.0, 0.0], 0.75 * rf)?;
                Record::new(rf, l2xt_norm(&focused, &SpacetimeRegion::q_box(rf, dt)?)?, f.l2_norm())
            })?;
            vec![series("knapp", records, &window)?]
        }
        ExperimentId::TinycapSharp => {
            let records = sweep(scales, |n| {
                let nf = n as f64;
                let r = nf.powf(-0.5);
                let f = tiny_cap(&make_grid(n)?, r, Edge::Smoothed)?;
                let lhs = l2x_linfty_t(&f, &SpacetimeRegion::q_box(nf, dt)?, Some(r))?;
                Record::new(nf, lhs, r * r * nf.sqrt())
            })?;
            for r in &records {
                checks.push(Check::within(format!("ratio at N={}", r.scale), r.ratio, 0.02, 50.0));
            }
            vec![series("tiny-cap", records, &window)?]
        }
        ExperimentId::BilinearTransverse => {
            let g = strip_grid()?;
            let pair = StripPair::new(1.0)?;
            let mut out = Vec::new();
            for &s in &config.seeds {
                let (f, gg) = strip_data(&g, &pair, StripForm::Normalized, s)?;
                let records = sweep(scales, |r| {
                    let rf = r as f64;
                    let ff = translate_spacetime(&f, [0.0, 0.0], 0.75 * rf)?;
                    let gf = translate_spacetime(&gg, [0.0, 0.0], 0.75 * rf)?;
                    let q = SpacetimeRegion::ball([0.0, 0.0], rf, 0.5 * rf, rf, dt)?;
                    Record::new(rf, l1x_l2t_bilinear(&ff, &gf, &q)?, f.l2_norm() * gg.l2_norm())
                })?;
                out.push(series(format!("seed-{s}"), records, &window)?);
            }
            out
        }
        ExperimentId::ShortLongRatio | ExperimentId::WideBallRatio => {
            let norms = |f: &FrequencyField, n: u32| -> Result<(f64, f64)> {
                if id == ExperimentId::ShortLongRatio {
                    let (short, long) = short_long_norms(f, n as usize, dt)?;
                    Ok((long, short))
                } else {
                    wide_ball_norms(f, n as usize, 2, dt)
                }
            };
            let knapp = sweep(scales, |n| {
                let f = knapp_family(&make_grid(n)?, n)?;
                let (a, b) = norms(&f, n)?;
                Record::new(n as f64, a, b)
            })?;
            let mut out = vec![series("knapp", knapp, &window)?];
            for &s in &config.seeds {
                let random = sweep(scales, |n| {
                    let f = random_annulus(&make_grid(n)?, s)?;
                    let (a, b) = norms(&f, n)?;
                    Record::new(n as f64, a, b)
                })?;
                out.push(series(format!("random-seed-{s}"), random, &window)?);
            }
            out
        }
        ExperimentId::LocalGlobal => {
            let lg = sweep(scales, |n| local_global_experiment_dt(&knapp_family(&make_grid(n)?, n)?, n as usize, dt))?;
            let local = series("local", lg.iter().map(|v| Record::new(v.scale, v.local, 1.0)).collect::<Result<_>>()?, &window)?;
            let global = series("global", lg.iter().map(|v| Record::new(v.scale, v.global, 1.0)).collect::<Result<_>>()?, &window)?;
            checks.push(Check::at_most(
                "s_global - 2 s_local",
                global.fit.alpha - 2.0 * local.fit.alpha,
                0.15,
            ));
            vec![local, global]
        }
        ExperimentId::WhitneyProduct => {
            let reports = sweep(scales, |n| {
                let g = whitney_grid(n)?;
                let d = decompose_annulus(default_depth(&g))?;
                let rep = product_identity(&random_annulus(&g, seed)?, &d, 3.0)?;
                let partners = if d.j_min <= -3 { partner_max(&d, -3)? } else { 0 };
                Ok((rep, partners))
            })?;
            let mut records = Vec::new();
            for (&n, (rep, partners)) in scales.iter().zip(&reports) {
                checks.push(Check::at_most(format!("relative error at n={n}"), rep.relative_error, 1e-6));
                checks.push(Check::below(format!("remainder share at n={n}"), rep.remainder_share, 0.05));
                checks.push(Check::at_most(format!("partners at j=-3, n={n}"), *partners as f64, 24.0));
                records.push(Record::new(n as f64, rep.remainder_share, 1.0)?);
            }
            vec![series("remainder-share", records, &window)?]
        }
        ExperimentId::WavepacketSuite => {
            let g = strip_grid()?;
            let pair = StripPair::new(1.0)?;
            let mut out = Vec::new();
            let mut constants = Vec::new();
            for &s in &config.seeds {
                let f = strip_data(&g, &pair, StripForm::Normalized, s)?.0;
                let per_scale = sweep(scales, |r| packet_suite(&f, r as f64))?;
                let mut records = Vec::new();
                for (&r, (rec, suite)) in scales.iter().zip(per_scale) {
                    let tag = format!("R={r}, seed {s}");
                    checks.push(Check::at_most(format!("reconstruction, {tag}"), suite.reconstruction, 1e-6));
                    checks.push(Check::at_most(format!("coefficient constant, {tag}"), rec.ratio, 8.0));
                    checks.push(Check::at_most(format!("overlap constant, {tag}"), suite.overlap, 4.0));
                    checks.push(Check::at_most(format!("sup times R^1/2, {tag}"), suite.sup_scaled, 10.0));
                    checks.push(Check::at_least(format!("mass near the core, {tag}"), suite.concentration, 0.9));
                    constants.push(rec.ratio);
                    records.push(rec);
                }
                out.push(series(format!("seed-{s}"), records, &window)?);
            }
            let mean = constants.iter().sum::<f64>() / constants.len() as f64;
            let spread = constants.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most("coefficient constant spread around the mean", spread, 0.5));
            out
        }
    };
    let pass = (window.is_open() || series.iter().all(|s| s.pass)) && checks.iter().all(|c| c.pass);
    Ok(ScalingRun { experiment: id, config: config.clone(), reference: id.reference(), window, series, checks, pass })
}

fn partner_max(d: &crate::whitney::WhitneyDecomposition, j: i32) -> Result<usize> {
    let mut count = std::collections::BTreeMap::new();
    for p in whitney_pairs(d, j)? {
        *count.entry(p.a.k).or_insert(0usize) += 1;
    }
    Ok(count.values().copied().max().unwrap_or(0))
}

/// Worst values over the packet window `t in {R/2, 3R/4, R}` at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSuite {
    pub reconstruction: f64,
    pub overlap: f64,
    /// `sup |phi_T| R^{1/2}` for the largest-coefficient tube.
    pub sup_scaled: f64,
    /// Mass fraction within `10 R^{1/2} log R` of the core.
    pub concentration: f64,
}

pub fn packet_suite(f: &FrequencyField, r: f64) -> Result<(Record, PacketSuite)> {
    let d = decompose(f, r)?;
    let coef = d.entries.iter().map(|e| e.coefficient.powi(2)).sum::<f64>().sqrt();
    let rec = Record::new(r, coef, d.data_norm)?;
    let region = SpacetimeRegion::new(Spatial::Ball(Ball::origin(r)?), 0.5 * r, r, MAX_DT)?;
    let local = d.restrict(&region)?;
    let top = d
        .entries
        .iter()
        .max_by(|a, b| a.coefficient.total_cmp(&b.coefficient))
        .ok_or_else(|| Error::Data("no wave packets".into()))?
        .tube;
    let mut s = PacketSuite { reconstruction: 0.0, overlap: 0.0, sup_scaled: 0.0, concentration: 1.0 };
    for t in [0.5 * r, 0.75 * r, r] {
        s.reconstruction = s.reconstruction.max(reconstruction_error(&d, f, t)?);
        s.overlap = s.overlap.max(overlap_norm_check(&local, t)?);
        let p = packet_field(&top, &d, t)?;
        s.sup_scaled = s.sup_scaled.max(p.max_abs() * r.sqrt());
        s.concentration = s.concentration.min(mass_within(&p, top.core(t), 10.0 * r.sqrt() * r.ln()));
    }
    Ok((rec, s))
}

fn csv(run: &ScalingRun) -> String {
    let mut s = String::from("series,scale,lhs,normalizer,ratio\n");
    for se in &run.series {
        for r in &se.records {
            s.push_str(&format!("{},{},{},{},{}\n", se.name, r.scale, r.lhs, r.normalizer, r.ratio));
        }
    }
    s
}

/// Writes `<experiment>.csv` and `<experiment>.json` under `dir`.
pub fn emit_report(run: &ScalingRun, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if run.series.is_empty() || run.series.iter().any(|s| s.records.is_empty()) {
        return Err(Error::Data("report has no records".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", run.experiment));
    let json_path = dir.join(format!("{}.json", run.experiment));
    std::fs::write(&csv_path, csv(run)).map_err(|e| Error::io(&csv_path, e))?;
    let mut json = serde_json::to_string_pretty(run)?;
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    Ok((csv_path, json_path))
}

pub fn load_report(path: &Path) -> Result<ScalingRun> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&s)?)
}

/// Fast invariant checks: oracle agreement, unitarity, group law, lattice
/// partition of unity and the two symmetries.
pub fn verify_suite() -> Result<Vec<Check>> {
    use crate::field_core::fejer_lattice_sum;
    use crate::propagator::{evolve, evolve_oracle, galilean_boost, parabolic_rescale};
    use rand::{Rng, SeedableRng};

    let mut checks = Vec::new();
    let g32 = GridSpec::new(32.0, 32)?;
    let mut oracle = 0.0f64;
    for seed in 0..20 {
        let f = random_annulus(&g32, seed)?;
        let a = evolve(&f, 1.7)?;
        let b = evolve_oracle(&f, 1.7)?;
        oracle = oracle.max(a.sub(&b)?.max_abs());
    }
    checks.push(Check::at_most("evolve vs direct sum, max abs", oracle, 1e-9));

    let g = make_grid(32)?;
    let f = random_annulus(&g, 1)?;
    let mut unitarity = 0.0f64;
    let mut group = 0.0f64;
    for t in [0.5, 8.0, 64.0] {
        unitarity = unitarity.max((evolve(&f, t)?.l2_norm() / f.l2_norm() - 1.0).abs());
        let step = crate::propagator::evolve::apply_multiplier(&f, 0.5 * t)?;
        let two = evolve(&step, 0.5 * t)?;
        let one = evolve(&f, t)?;
        group = group.max(two.sub(&one)?.l2_norm() / one.l2_norm());
    }
    checks.push(Check::at_most("unitarity, relative", unitarity, 1e-10));
    checks.push(Check::at_most("group law, relative", group, 1e-10));

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut poisson = 0.0f64;
    for _ in 0..100 {
        let x = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        poisson = poisson.max((fejer_lattice_sum(x) - 1.0).abs());
    }
    checks.push(Check::at_most("lattice partition of unity", poisson, 1e-12));

    let n = g.n();
    let lambda = 16.0 * g.dxi();
    let boosted = galilean_boost(&f, lambda)?;
    let mut galilean = 0.0f64;
    for k in [1usize, 3] {
        // times at which the drift 2 t lambda is a whole number of nodes
        let t = k as f64 * g.h() / (2.0 * lambda);
        let (u, v) = (evolve(&f, t)?, evolve(&boosted, t)?);
        for i in 0..n {
            for j in 0..n {
                galilean = galilean.max((v.at(i, j).norm() - u.at((i + n - k) % n, j).norm()).abs());
            }
        }
    }
    checks.push(Check::at_most("Galilean covariance, pointwise", galilean, 1e-8));

    let mu = 2.0;
    let t = 6.0;
    let lhs = evolve(&parabolic_rescale(&f, mu)?, t)?;
    let rhs = evolve(&f, t / (mu * mu))?;
    let parabolic =
        lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b / (mu * mu)).norm()).fold(0.0, f64::max) / rhs.max_abs();
    checks.push(Check::at_most("parabolic covariance, relative", parabolic, 1e-8));
    Ok(checks)
}
