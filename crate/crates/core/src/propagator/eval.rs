//! Space-time evaluation of `e^{itDelta} f` on point sets and uniform time
//! grids, streamed into per-point reducers.
//!
//! Three interchangeable backends:
//! - `Fft`: one inverse 2D FFT per time sample and source.
//! - `Separable`: `X1 . diag(T1) F diag(T2) . X2^T` over the frequency
//!   bounding box and the spatial bounding box of the points.
//! - `Chirp`: per point, the time series `sum_q A_q(x) e^{i kappa q t}` with
//!   `q = m1^2 + m2^2` integer, evaluated on the whole time grid at once by a
//!   Bluestein convolution whose kernel transform is shared by all points.
//!
//! Every backend feeds each point's reducer in increasing time order, so
//! results are deterministic and agree across backends to rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_core::fields::same_grid;
use crate::field_core::transform::plan;
use crate::field_core::{inverse_ft, Complex64, FrequencyField, GridSpec, TimeGrid, ZERO};

use super::evolve::apply_multiplier;

/// A field evaluated at `e^{i(t + shift)Delta}`.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub field: &'a FrequencyField,
    pub shift: f64,
}

impl<'a> Source<'a> {
    pub fn new(field: &'a FrequencyField) -> Self {
        Source { field, shift: 0.0 }
    }

    pub fn shifted(field: &'a FrequencyField, shift: f64) -> Self {
        Source { field, shift }
    }
}

/// Grid nodes at which the evolution is sampled (row-major indices).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub grid: GridSpec,
    pub nodes: Vec<usize>,
}

impl PointSet {
    pub fn new(grid: GridSpec, nodes: Vec<usize>) -> Self {
        PointSet { grid, nodes }
    }

    pub fn all(grid: GridSpec) -> Self {
        PointSet { grid, nodes: (0..grid.len()).collect() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn index_box(&self) -> [usize; 4] {
        let n = self.grid.n();
        let mut b = [usize::MAX, 0, usize::MAX, 0];
        for &idx in &self.nodes {
            let (i, j) = (idx / n, idx % n);
            b[0] = b[0].min(i);
            b[1] = b[1].max(i);
            b[2] = b[2].min(j);
            b[3] = b[3].max(j);
        }
        b
    }
}

/// Streaming per-point accumulator. `u` holds one value per source.
pub trait Reducer: Sync {
    type State: Send + Sync + Clone;
    fn init(&self) -> Self::State;
    fn update(&self, st: &mut Self::State, k: usize, t: f64, w: f64, u: &[Complex64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Auto,
    Fft,
    Separable,
    Chirp,
}

/// Rough flop counts for each backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub fft: f64,
    pub separable: f64,
    pub chirp: f64,
}

impl CostEstimate {
    pub fn best(&self) -> Backend {
        if self.chirp <= self.fft && self.chirp <= self.separable {
            Backend::Chirp
        } else if self.separable <= self.fft {
            Backend::Separable
        } else {
            Backend::Fft
        }
    }
}

struct ModeInfo {
    bbox: [i64; 4],
    nnz: usize,
    qmin: i64,
    qmax: i64,
}

fn mode_info(f: &FrequencyField) -> Option<ModeInfo> {
    let g = f.grid();
    let n = g.n();
    let bbox = f.mode_bbox(0.0)?;
    let mut nnz = 0;
    let (mut qmin, mut qmax) = (i64::MAX, i64::MIN);
    for (idx, v) in f.values().iter().enumerate() {
        if *v != ZERO {
            nnz += 1;
            let (m1, m2) = (g.mode(idx / n), g.mode(idx % n));
            let q = m1 * m1 + m2 * m2;
            qmin = qmin.min(q);
            qmax = qmax.max(q);
        }
    }
    Some(ModeInfo { bbox, nnz, qmin, qmax })
}

fn chirp_len(span: usize, count: usize) -> usize {
    (span + count).next_power_of_two()
}

pub fn estimate_cost(sources: &[Source], points: &PointSet, times: &TimeGrid) -> CostEstimate {
    let n = points.grid.n() as f64;
    let k = times.count as f64;
    let pb = points.index_box();
    let (m1, m2) = if points.is_empty() {
        (0.0, 0.0)
    } else {
        ((pb[1] - pb[0] + 1) as f64, (pb[3] - pb[2] + 1) as f64)
    };
    let mut c = CostEstimate { fft: 0.0, separable: 0.0, chirp: 0.0 };
    let infos: Vec<_> = sources.iter().filter_map(|s| mode_info(s.field)).collect();
    let span = infos.iter().map(|i| (i.qmax - i.qmin + 1) as usize).max().unwrap_or(1);
    let m = chirp_len(span, times.count) as f64;
    for info in &infos {
        let k1 = (info.bbox[1] - info.bbox[0] + 1) as f64;
        let k2 = (info.bbox[3] - info.bbox[2] + 1) as f64;
        let nnz = info.nnz as f64;
        c.fft += k * (10.0 * n * n * n.log2() + 40.0 * nnz + 8.0 * n * n);
        let order = (m1 * k1 * k2 + m1 * k2 * m2).min(k1 * k2 * m2 + m1 * k1 * m2);
        c.separable += k * (8.0 * order + 8.0 * k1 * k2 + 40.0 * (k1 + k2)) + 8.0 * (m1 * k1 + m2 * k2) * 5.0;
        c.chirp += points.len() as f64 * (8.0 * nnz + 10.0 * m * m.log2() + 8.0 * m);
    }
    c
}

/// Evaluates every source at every point and time, feeding `reducer`.
pub fn evaluate<R: Reducer>(
    sources: &[Source],
    points: &PointSet,
    times: &TimeGrid,
    reducer: &R,
    backend: Backend,
) -> Result<Vec<R::State>> {
    for s in sources {
        same_grid(s.field.grid(), &points.grid)?;
        if !s.shift.is_finite() {
            return Err(Error::Argument("time shift must be finite".into()));
        }
    }
    if !(times.t0.is_finite() && times.step.is_finite() && times.step > 0.0) {
        return Err(Error::Argument("time grid must be finite with positive step".into()));
    }
    let backend = match backend {
        Backend::Auto => estimate_cost(sources, points, times).best(),
        b => b,
    };
    match backend {
        Backend::Fft | Backend::Auto => eval_fft(sources, points, times, reducer),
        Backend::Separable => eval_separable(sources, points, times, reducer),
        Backend::Chirp => eval_chirp(sources, points, times, reducer),
    }
}

fn scatter_updates<R: Reducer>(
    states: &mut [R::State],
    slices: &[Vec<Complex64>],
    k: usize,
    t: f64,
    w: f64,
    reducer: &R,
) {
    let s = slices.len();
    states.par_iter_mut().enumerate().for_each_init(
        || vec![ZERO; s],
        |buf, (p, st)| {
            for (b, sl) in buf.iter_mut().zip(slices) {
                *b = sl[p];
            }
            reducer.update(st, k, t, w, buf);
        },
    );
}

fn eval_fft<R: Reducer>(sources: &[Source], points: &PointSet, times: &TimeGrid, reducer: &R) -> Result<Vec<R::State>> {
    let mut states = vec![reducer.init(); points.len()];
    let mut slices = vec![vec![ZERO; points.len()]; sources.len()];
    for k in 0..times.count {
        let t = times.t(k);
        for (src, out) in sources.iter().zip(slices.iter_mut()) {
            let u = inverse_ft(&apply_multiplier(src.field, t + src.shift)?);
            let v = u.values();
            for (o, &idx) in out.iter_mut().zip(&points.nodes) {
                *o = v[idx];
            }
        }
        scatter_updates(&mut states, &slices, k, t, times.weight(k), reducer);
    }
    Ok(states)
}

/// `C = A B` for row-major complex matrices.
fn matmul(a: &[Complex64], b: &[Complex64], m: usize, k: usize, p: usize) -> Vec<Complex64> {
    let mut c = vec![ZERO; m * p];
    c.par_chunks_mut(p).enumerate().for_each(|(i, row)| {
        let ar = &a[i * k..(i + 1) * k];
        for (l, &x) in ar.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let br = &b[l * p..(l + 1) * p];
            for (cv, bv) in row.iter_mut().zip(br) {
                *cv += x * bv;
            }
        }
    });
    c
}

struct SepSource {
    k1: usize,
    k2: usize,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    f: Vec<Complex64>,
    x1: Vec<Complex64>,
    x2t: Vec<Complex64>,
    shift: f64,
    empty: bool,
}

fn eval_separable<R: Reducer>(
    sources: &[Source],
    points: &PointSet,
    times: &TimeGrid,
    reducer: &R,
) -> Result<Vec<R::State>> {
    let g = points.grid;
    let n = g.n();
    let mut states = vec![reducer.init(); points.len()];
    if points.is_empty() {
        return Ok(states);
    }
    let pb = points.index_box();
    let (m1, m2) = (pb[1] - pb[0] + 1, pb[3] - pb[2] + 1);
    let d2 = g.dxi().powi(2);
    let prepared: Vec<SepSource> = sources
        .iter()
        .map(|s| {
            let Some(bb) = s.field.mode_bbox(0.0) else {
                return SepSource {
                    k1: 0,
                    k2: 0,
                    xi1: vec![],
                    xi2: vec![],
                    f: vec![],
                    x1: vec![],
                    x2t: vec![],
                    shift: s.shift,
                    empty: true,
                };
            };
            let k1 = (bb[1] - bb[0] + 1) as usize;
            let k2 = (bb[3] - bb[2] + 1) as usize;
            let xi1: Vec<f64> = (0..k1).map(|a| (bb[0] + a as i64) as f64 * g.dxi()).collect();
            let xi2: Vec<f64> = (0..k2).map(|b| (bb[2] + b as i64) as f64 * g.dxi()).collect();
            let mut f = vec![ZERO; k1 * k2];
            for a in 0..k1 {
                let i = g.index_of_mode(bb[0] + a as i64).unwrap();
                for b in 0..k2 {
                    let j = g.index_of_mode(bb[2] + b as i64).unwrap();
                    f[a * k2 + b] = s.field.values()[i * n + j] * d2;
                }
            }
            let mut x1 = vec![ZERO; m1 * k1];
            for p in 0..m1 {
                let x = g.x(pb[0] + p);
                for a in 0..k1 {
                    x1[p * k1 + a] = Complex64::from_polar(1.0, x * xi1[a]);
                }
            }
            let mut x2t = vec![ZERO; k2 * m2];
            for b in 0..k2 {
                for q in 0..m2 {
                    x2t[b * m2 + q] = Complex64::from_polar(1.0, g.x(pb[2] + q) * xi2[b]);
                }
            }
            SepSource { k1, k2, xi1, xi2, f, x1, x2t, shift: s.shift, empty: false }
        })
        .collect();
    let mut slices = vec![vec![ZERO; points.len()]; sources.len()];
    for k in 0..times.count {
        let t = times.t(k);
        for (sp, out) in prepared.iter().zip(slices.iter_mut()) {
            if sp.empty {
                out.iter_mut().for_each(|v| *v = ZERO);
                continue;
            }
            let tt = t + sp.shift;
            let t1: Vec<Complex64> = sp.xi1.iter().map(|x| Complex64::from_polar(1.0, tt * x * x)).collect();
            let t2: Vec<Complex64> = sp.xi2.iter().map(|x| Complex64::from_polar(1.0, tt * x * x)).collect();
            let mut ft = sp.f.clone();
            for a in 0..sp.k1 {
                for b in 0..sp.k2 {
                    ft[a * sp.k2 + b] *= t1[a] * t2[b];
                }
            }
            let (k1, k2) = (sp.k1, sp.k2);
            let u = if k1 * k2 * m2 + m1 * k1 * m2 <= m1 * k1 * k2 + m1 * k2 * m2 {
                let gm = matmul(&ft, &sp.x2t, k1, k2, m2);
                matmul(&sp.x1, &gm, m1, k1, m2)
            } else {
                let hm = matmul(&sp.x1, &ft, m1, k1, k2);
                matmul(&hm, &sp.x2t, m1, k2, m2)
            };
            for (o, &idx) in out.iter_mut().zip(&points.nodes) {
                let (i, j) = (idx / n - pb[0], idx % n - pb[2]);
                *o = u[i * m2 + j];
            }
        }
        scatter_updates(&mut states, &slices, k, t, times.weight(k), reducer);
    }
    Ok(states)
}

struct ChirpSource {
    /// `(index into per-axis tables, q - qmin, coefficient with time phase)`
    modes: Vec<(usize, usize, usize, Complex64)>,
    qmin: i64,
    empty: bool,
}

fn eval_chirp<R: Reducer>(sources: &[Source], points: &PointSet, times: &TimeGrid, reducer: &R) -> Result<Vec<R::State>> {
    let g = points.grid;
    let n = g.n();
    let kappa = g.dxi().powi(2);
    let beta = kappa * times.step;
    let kc = times.count;
    let d2 = kappa;
    let prepared: Vec<ChirpSource> = sources
        .iter()
        .map(|s| {
            let Some(info) = mode_info(s.field) else {
                return ChirpSource { modes: vec![], qmin: 0, empty: true };
            };
            let t0 = times.t0 + s.shift;
            let modes = s
                .field
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != ZERO)
                .map(|(idx, v)| {
                    let (i, j) = (idx / n, idx % n);
                    let (a, b) = (g.mode(i), g.mode(j));
                    let q = a * a + b * b;
                    let c = v * d2 * Complex64::from_polar(1.0, kappa * q as f64 * t0);
                    (i, j, (q - info.qmin) as usize, c)
                })
                .collect();
            ChirpSource { modes, qmin: info.qmin, empty: false }
        })
        .collect();
    let span = prepared
        .iter()
        .filter(|p| !p.empty)
        .map(|p| p.modes.iter().map(|m| m.2).max().unwrap_or(0) + 1)
        .max()
        .unwrap_or(1);
    let m = chirp_len(span, kc);
    if m > (1 << 24) {
        return Err(Error::Resource(format!("chirp transform of length {m} is too large")));
    }
    let fwd = plan(m, false);
    let inv = plan(m, true);
    // kernel c_d = e^{-i beta d^2 / 2}, d in [-(span-1), kc-1], stored cyclically
    let mut kernel = vec![ZERO; m];
    for d in -(span as i64 - 1)..(kc as i64) {
        let ph = -0.5 * beta * (d as f64) * (d as f64);
        kernel[d.rem_euclid(m as i64) as usize] = Complex64::from_polar(1.0, ph);
    }
    let mut scratch = vec![ZERO; fwd.get_inplace_scratch_len()];
    fwd.process_with_scratch(&mut kernel, &mut scratch);
    let pre: Vec<Complex64> = (0..span).map(|p| Complex64::from_polar(1.0, 0.5 * beta * (p as f64).powi(2))).collect();
    let post: Vec<Complex64> = (0..kc)
        .map(|k| Complex64::from_polar(1.0 / m as f64, 0.5 * beta * (k as f64).powi(2)))
        .collect();
    let qphase: Vec<Vec<Complex64>> = prepared
        .iter()
        .map(|p| (0..kc).map(|k| Complex64::from_polar(1.0, beta * p.qmin as f64 * k as f64)).collect())
        .collect();
    // per-axis plane-wave tables e^{i x xi}
    let axis: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|k| Complex64::from_polar(1.0, g.x(i) * g.xi(k))).collect())
        .collect();
    let weights: Vec<f64> = (0..kc).map(|k| times.weight(k)).collect();
    let tvals = times.times();
    let states = points
        .nodes
        .par_iter()
        .map_init(
            || {
                (
                    vec![vec![ZERO; m]; sources.len()],
                    vec![ZERO; fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())],
                    vec![ZERO; sources.len()],
                )
            },
            |(bufs, scratch, u), &idx| {
                let (pi, pj) = (idx / n, idx % n);
                for (sp, buf) in prepared.iter().zip(bufs.iter_mut()) {
                    buf.iter_mut().for_each(|v| *v = ZERO);
                    if sp.empty {
                        continue;
                    }
                    for &(i, j, p, c) in &sp.modes {
                        buf[p] += c * axis[pi][i] * axis[pj][j];
                    }
                    for (b, w) in buf.iter_mut().zip(&pre) {
                        *b *= w;
                    }
                    fwd.process_with_scratch(buf, scratch);
                    for (b, kv) in buf.iter_mut().zip(&kernel) {
                        *b *= kv;
                    }
                    inv.process_with_scratch(buf, scratch);
                }
                let mut st = reducer.init();
                for k in 0..kc {
                    for (s, sp) in prepared.iter().enumerate() {
                        u[s] = if sp.empty { ZERO } else { bufs[s][k] * post[k] * qphase[s][k] };
                    }
                    reducer.update(&mut st, k, tvals[k], weights[k], u);
                }
                st
            },
        )
        .collect();
    Ok(states)
}

/// Maximum modulus of the first source.
pub struct MaxAbs;

impl Reducer for MaxAbs {
    type State = f64;
    fn init(&self) -> f64 {
        0.0
    }
    fn update(&self, st: &mut f64, _k: usize, _t: f64, _w: f64, u: &[Complex64]) {
        *st = st.max(u[0].norm());
    }
}

/// Maximum modulus of the first source and the time where it is attained.
pub struct ArgMax;

impl Reducer for ArgMax {
    type State = (f64, f64);
    fn init(&self) -> (f64, f64) {
        (0.0, f64::NAN)
    }
    fn update(&self, st: &mut (f64, f64), _k: usize, t: f64, _w: f64, u: &[Complex64]) {
        let a = u[0].norm();
        if a > st.0 || st.1.is_nan() {
            *st = (a, t);
        }
    }
}

/// `(max over t <= split, max over all t)` of the first source.
pub struct SplitMax {
    pub split: f64,
}

impl Reducer for SplitMax {
    type State = (f64, f64);
    fn init(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
    fn update(&self, st: &mut (f64, f64), _k: usize, t: f64, _w: f64, u: &[Complex64]) {
        let a = u[0].norm();
        if t <= self.split + 1e-9 {
            st.0 = st.0.max(a);
        }
        st.1 = st.1.max(a);
    }
}

/// `sum_t w |u|^p` of the first source.
pub struct PowerSum {
    pub p: i32,
}

impl Reducer for PowerSum {
    type State = f64;
    fn init(&self) -> f64 {
        0.0
    }
    fn update(&self, st: &mut f64, _k: usize, _t: f64, w: f64, u: &[Complex64]) {
        *st += w * u[0].norm_sqr().powi(self.p / 2) * if self.p % 2 == 1 { u[0].norm() } else { 1.0 };
    }
}

/// `sum_t w |u0 u1|^2`.
pub struct BilinearSq;

impl Reducer for BilinearSq {
    type State = f64;
    fn init(&self) -> f64 {
        0.0
    }
    fn update(&self, st: &mut f64, _k: usize, _t: f64, w: f64, u: &[Complex64]) {
        *st += w * (u[0] * u[1]).norm_sqr();
    }
}

/// Records every value of every source (tests and small diagnostics).
pub struct Recorder;

impl Reducer for Recorder {
    type State = Vec<Vec<Complex64>>;
    fn init(&self) -> Self::State {
        Vec::new()
    }
    fn update(&self, st: &mut Self::State, _k: usize, _t: f64, _w: f64, u: &[Complex64]) {
        st.push(u.to_vec());
    }
}
