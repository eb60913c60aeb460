//! Wave packets at scale `R` for data on a transverse strip: velocity cells
//! of side `R^{-1/2}`, spatial windows on the lattice `R^{1/2} Z^2`, tubes,
//! coefficients and reconstruction.
//!
//! The spatial window is `W = |h|^2` where `h_hat` is the indicator of a disk
//! of radius `a R^{-1/2} / 2`. Its transform lives in the disk of radius
//! `a R^{-1/2}`, inside the first dual lattice point `2pi R^{-1/2}`, so the
//! lattice translates of `W` sum to a constant (normalized to 1).

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::examples::{StripPair, StripForm};
use crate::field_core::transform::fft2;
use crate::field_core::{
    edge, forward_ft, inverse_ft, Complex64, FrequencyField, GridSpec, SpacetimeRegion, Spatial, SpatialField, Support,
};
use crate::propagator::evolve;

/// Window disk parameter `a`.
pub const WINDOW_A: f64 = 3.1;
/// Coefficients below this fraction of `||f||_2` are dropped.
pub const COEFFICIENT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripTag {
    /// Centered at `(3/4, 0)`.
    First,
    /// Centered at `(5/4, 0)`.
    Second,
}

impl StripTag {
    pub fn support(&self) -> Support {
        let s = StripPair { lambda: 1.0 }.supports(StripForm::Normalized);
        match self {
            StripTag::First => s[0],
            StripTag::Second => s[1],
        }
    }

    /// The strip whose box contains `support`.
    pub fn of_support(support: &Support) -> Option<StripTag> {
        let b = support.bounding_box();
        [StripTag::First, StripTag::Second].into_iter().find(|t| {
            let s = t.support().bounding_box();
            b[0] >= s[0] - 1e-12 && b[1] <= s[1] + 1e-12 && b[2] >= s[2] - 1e-12 && b[3] <= s[3] + 1e-12
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub scale: f64,
    /// Lattice index of `x(T) = R^{1/2} p`.
    pub lattice: [i64; 2],
    /// Velocity cell index, `v(T) = R^{-1/2} c`.
    pub cell: [i64; 2],
    pub strip: StripTag,
}

impl Tube {
    pub fn position(&self) -> [f64; 2] {
        let s = self.scale.sqrt();
        [self.lattice[0] as f64 * s, self.lattice[1] as f64 * s]
    }

    pub fn velocity(&self) -> [f64; 2] {
        let s = self.scale.sqrt().recip();
        [self.cell[0] as f64 * s, self.cell[1] as f64 * s]
    }

    /// Core center `x(T) - 2 t v(T)` (group velocity of `e^{it|xi|^2}` is `-2 xi`).
    pub fn core(&self, t: f64) -> [f64; 2] {
        let x = self.position();
        let v = self.velocity();
        [x[0] - 2.0 * t * v[0], x[1] - 2.0 * t * v[1]]
    }

    /// Whether `{(t, x): R/2 <= t <= R, |x - core(t)| <= R^{1/2}}` meets the region.
    pub fn meets(&self, region: &SpacetimeRegion) -> Result<bool> {
        let Spatial::Ball(b) = region.spatial else {
            return Err(Error::Argument("tube regions must be balls".into()));
        };
        let t0 = region.t0.max(0.5 * self.scale);
        let t1 = region.t1.min(self.scale);
        if t0 > t1 {
            return Ok(false);
        }
        let x = self.position();
        let v = self.velocity();
        let a = [x[0] - b.center[0], x[1] - b.center[1]];
        let vv = v[0] * v[0] + v[1] * v[1];
        // |a - 2 t v| is minimized at t = a.v / (2 |v|^2)
        let t = if vv > 0.0 { ((a[0] * v[0] + a[1] * v[1]) / (2.0 * vv)).clamp(t0, t1) } else { t0 };
        let d = (a[0] - 2.0 * t * v[0]).hypot(a[1] - 2.0 * t * v[1]);
        Ok(d <= self.scale.sqrt() + b.radius)
    }
}

fn check_scale(r: f64) -> Result<()> {
    let lg = r.log2();
    if !(r >= 16.0 && (lg - lg.round()).abs() < 1e-12) {
        return Err(Error::Argument(format!("packet scale {r} must be a power of two >= 16")));
    }
    Ok(())
}

/// `H(y)`: 0 for `y <= -w/2`, 1 for `y >= w/2`.
fn rise(y: f64, w: f64) -> f64 {
    1.0 - edge(y + 0.5 * w, w)
}

/// Smooth partition function of the velocity cell `c` (side `s`, transition `s/8`).
pub fn cell_partition(c: [i64; 2], s: f64, xi: [f64; 2]) -> f64 {
    let w = s / 8.0;
    (0..2)
        .map(|a| {
            let lo = (c[a] as f64 - 0.5) * s;
            rise(xi[a] - lo, w) - rise(xi[a] - lo - s, w)
        })
        .product()
}

/// Velocity cells whose partition function meets the strip.
pub fn velocity_cells(r: f64, strip: StripTag) -> Vec<[i64; 2]> {
    let s = r.sqrt().recip();
    let reach = 0.5 * s + s / 16.0;
    let b = strip.support().bounding_box();
    let range = |lo: f64, hi: f64| ((lo - reach) / s).floor() as i64..=((hi + reach) / s).ceil() as i64;
    let mut out = Vec::new();
    for c1 in range(b[0], b[1]) {
        for c2 in range(b[2], b[3]) {
            let v = [c1 as f64 * s, c2 as f64 * s];
            if v[0] + reach > b[0] && v[0] - reach < b[1] && v[1] + reach > b[2] && v[1] - reach < b[3] {
                out.push([c1, c2]);
            }
        }
    }
    out
}

/// Every lattice tube for the strip whose core meets the ball region.
pub fn tube_lattice(r: f64, strip: StripTag, region: &SpacetimeRegion) -> Result<Vec<Tube>> {
    check_scale(r)?;
    let Spatial::Ball(b) = region.spatial else {
        return Err(Error::Argument("tube regions must be balls".into()));
    };
    let sq = r.sqrt();
    let mut out = Vec::new();
    for cell in velocity_cells(r, strip) {
        let v = [cell[0] as f64 / sq, cell[1] as f64 / sq];
        // cores x - 2 t v reach the ball only from this far for t <= R
        let span = b.radius + sq + 2.0 * r * v[0].hypot(v[1]);
        let lo = |c: f64| ((c - span) / sq).floor() as i64;
        let hi = |c: f64| ((c + span) / sq).ceil() as i64;
        for p1 in lo(b.center[0])..=hi(b.center[0]) {
            for p2 in lo(b.center[1])..=hi(b.center[1]) {
                let t = Tube { scale: r, lattice: [p1, p2], cell, strip };
                if t.meets(region)? {
                    out.push(t);
                }
            }
        }
    }
    Ok(out)
}

/// The normalized spatial window on the grid, stored by offset from the origin
/// (index 0 is `x = 0`), real and even.
#[derive(Debug, Clone)]
pub struct Window {
    pub scale: f64,
    pub grid: GridSpec,
    /// Lattice spacing in grid steps.
    pub step: usize,
    pub values: Vec<f64>,
}

impl Window {
    pub fn new(grid: &GridSpec, r: f64) -> Result<Self> {
        check_scale(r)?;
        let sq = r.sqrt();
        let q = sq / grid.h();
        let n = grid.n();
        let step = q.round() as usize;
        if (q - step as f64).abs() > 1e-9 || step == 0 || n % step != 0 {
            return Err(Error::Argument(format!(
                "lattice spacing {sq} must be a whole number of grid steps {} dividing the cell",
                grid.h()
            )));
        }
        let rad = 0.5 * WINDOW_A / sq;
        if rad < 2.0 * grid.dxi() {
            return Err(Error::Resolution(format!("window disk radius {rad:e} below 2 dxi")));
        }
        let hh = FrequencyField::from_fn(*grid, |xi| Complex64::new(if xi[0].hypot(xi[1]) <= rad { 1.0 } else { 0.0 }, 0.0), None)?;
        let h = inverse_ft(&hh);
        // reorder so that index 0 is x = 0 (node n/2)
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let src = ((i + n / 2) % n) * n + (j + n / 2) % n;
                values[i * n + j] = h.values()[src].norm_sqr();
            }
        }
        let lattice_sum: f64 = (0..n / step)
            .flat_map(|a| (0..n / step).map(move |b| (a * step, b * step)))
            .map(|(i, j)| values[i * n + j])
            .sum();
        values.iter_mut().for_each(|v| *v /= lattice_sum);
        Ok(Window { scale: r, grid: *grid, step, values })
    }

    /// Sum of the window translates at lattice nodes weighted by `weights`
    /// (indexed by node): `sum_p w_p W(x - p)`.
    fn spread(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let mut a: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        let mut b: Vec<Complex64> = self.values.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        convolve(&mut a, &mut b, n);
        a.iter().map(|z| z.re).collect()
    }
}

/// Circular convolution `a <- a * b` (both destroyed/overwritten).
fn convolve(a: &mut [Complex64], b: &mut [Complex64], n: usize) {
    fft2(a, n, false);
    fft2(b, n, false);
    let s = 1.0 / (n * n) as f64;
    a.iter_mut().zip(b.iter()).for_each(|(x, y)| *x = *x * y * s);
    fft2(a, n, true);
}

fn node_of_lattice(grid: &GridSpec, step: usize, p: [i64; 2]) -> usize {
    let n = grid.n() as i64;
    let half = n / 2;
    let wrap = |v: i64| (v * step as i64 + half).rem_euclid(n) as usize;
    wrap(p[0]) * grid.n() + wrap(p[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketEntry {
    pub tube: Tube,
    /// `||W(. - x(T)) f_cell||_2`.
    pub coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct WavePacketDecomp {
    pub scale: f64,
    pub strip: StripTag,
    pub entries: Vec<PacketEntry>,
    pub data_norm: f64,
    window: Window,
    /// Spatial pieces `f_cell` at `t = 0`, one per velocity cell.
    cells: Vec<([i64; 2], SpatialField)>,
}

/// Serializable form: tubes and coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacketRecord {
    pub scale: f64,
    pub strip: StripTag,
    pub grid_l: f64,
    pub grid_n: usize,
    pub window_a: f64,
    pub data_norm: f64,
    pub entries: Vec<PacketEntry>,
}

pub fn decompose(fh: &FrequencyField, r: f64) -> Result<WavePacketDecomp> {
    check_scale(r)?;
    let Some(support) = fh.support() else {
        return Err(Error::Support("data must declare a strip support".into()));
    };
    let Some(strip) = StripTag::of_support(&support) else {
        return Err(Error::Support(format!("support {support:?} is not inside a strip")));
    };
    decompose_cells(fh, r, strip, velocity_cells(r, strip))
}

/// The same construction for data anywhere in the band: every velocity cell
/// whose partition meets a nonzero mode is used, and tubes carry the strip
/// whose center is nearest their velocity.
pub fn decompose_general(fh: &FrequencyField, r: f64) -> Result<WavePacketDecomp> {
    check_scale(r)?;
    let s = r.sqrt().recip();
    let reach = 0.5 * s + s / 16.0;
    let mut cells = std::collections::BTreeSet::new();
    for (idx, v) in fh.values().iter().enumerate() {
        if v.norm() == 0.0 {
            continue;
        }
        let xi = fh.xi_at(idx);
        let lo = |x: f64| ((x - reach) / s).ceil() as i64;
        let hi = |x: f64| ((x + reach) / s).floor() as i64;
        for c1 in lo(xi[0])..=hi(xi[0]) {
            for c2 in lo(xi[1])..=hi(xi[1]) {
                cells.insert([c1, c2]);
            }
        }
    }
    let centre = |c: &[i64; 2]| [c[0] as f64 * s, c[1] as f64 * s];
    let near = |t: StripTag, c: &[i64; 2]| {
        let b = t.support().bounding_box();
        let v = centre(c);
        (v[0] - 0.5 * (b[0] + b[1])).hypot(v[1] - 0.5 * (b[2] + b[3]))
    };
    let all: Vec<[i64; 2]> = cells.into_iter().collect();
    let strip = match all.first() {
        Some(c) if near(StripTag::Second, c) < near(StripTag::First, c) => StripTag::Second,
        _ => StripTag::First,
    };
    decompose_cells(fh, r, strip, all)
}

fn decompose_cells(fh: &FrequencyField, r: f64, strip: StripTag, cell_list: Vec<[i64; 2]>) -> Result<WavePacketDecomp> {
    let grid = *fh.grid();
    let s = r.sqrt().recip();
    if s < 2.0 * grid.dxi() {
        return Err(Error::Resolution(format!("cell side {s:e} below twice the frequency spacing {:e}", grid.dxi())));
    }
    let window = Window::new(&grid, r)?;
    let n = grid.n();
    let data_norm = fh.l2_norm();
    let h2 = grid.h().powi(2);
    let w2: Vec<Complex64> = window.values.iter().map(|w| Complex64::new(w * w, 0.0)).collect();

    let per_cell: Vec<Result<(([i64; 2], SpatialField), Vec<PacketEntry>)>> = cell_list
        .into_par_iter()
        .map(|cell| {
            let values = fh
                .values()
                .iter()
                .enumerate()
                .map(|(idx, v)| v * cell_partition(cell, s, fh.xi_at(idx)))
                .collect();
            let piece = FrequencyField::new(grid, values, None)?;
            let g = inverse_ft(&piece);
            // c^2(p) = sum_y W(y - p)^2 |g(y)|^2 h^2, a convolution since W is even
            let mut a: Vec<Complex64> = g.values().iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
            let mut b = w2.clone();
            convolve(&mut a, &mut b, n);
            let m = n / window.step;
            let half = (m / 2) as i64;
            let mut entries = Vec::new();
            for p1 in -half..(m as i64 - half) {
                for p2 in -half..(m as i64 - half) {
                    let c2 = a[node_of_lattice(&grid, window.step, [p1, p2])].re * h2;
                    let c = c2.max(0.0).sqrt();
                    if c > COEFFICIENT_FLOOR * data_norm {
                        entries.push(PacketEntry { tube: Tube { scale: r, lattice: [p1, p2], cell, strip }, coefficient: c });
                    }
                }
            }
            Ok(((cell, g), entries))
        })
        .collect();
    let mut cells = Vec::new();
    let mut entries = Vec::new();
    for pc in per_cell {
        let (c, e) = pc?;
        cells.push(c);
        entries.extend(e);
    }
    Ok(WavePacketDecomp { scale: r, strip, entries, data_norm, window, cells })
}

fn check_window(r: f64, t: f64) -> Result<()> {
    if !(t >= 0.5 * r && t <= r) {
        return Err(Error::Range(format!("time {t} outside [R/2, R] = [{}, {r}]", 0.5 * r)));
    }
    Ok(())
}

impl WavePacketDecomp {
    pub fn grid(&self) -> &GridSpec {
        &self.window.grid
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `(sum |c_T|^2)^{1/2} / ||f||_2`.
    pub fn coefficient_constant(&self) -> Result<f64> {
        if self.data_norm == 0.0 {
            return Err(Error::UndefinedRatio("zero data".into()));
        }
        Ok(self.entries.iter().map(|e| e.coefficient.powi(2)).sum::<f64>().sqrt() / self.data_norm)
    }

    /// Keeps only the tubes that meet `region`.
    pub fn restrict(&self, region: &SpacetimeRegion) -> Result<WavePacketDecomp> {
        let mut entries = Vec::new();
        for e in &self.entries {
            if e.tube.meets(region)? {
                entries.push(*e);
            }
        }
        Ok(WavePacketDecomp { entries, ..self.clone() })
    }

    fn cell_field(&self, cell: [i64; 2]) -> Result<&SpatialField> {
        self.cells
            .iter()
            .find(|(c, _)| *c == cell)
            .map(|(_, g)| g)
            .ok_or_else(|| Error::Argument(format!("velocity cell {cell:?} is not part of the decomposition")))
    }

    fn entry(&self, tube: &Tube) -> Result<&PacketEntry> {
        self.entries
            .iter()
            .find(|e| e.tube.lattice == tube.lattice && e.tube.cell == tube.cell)
            .ok_or_else(|| Error::Argument(format!("tube {tube:?} is not in the decomposition")))
    }

    /// `sum_p w_p W(. - p)` times the cell piece, summed over cells, as a
    /// frequency field. `weight` gives each entry's factor.
    fn combine(&self, entries: &[PacketEntry], weight: impl Fn(&PacketEntry) -> f64 + Sync) -> Result<FrequencyField> {
        let grid = *self.grid();
        let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (cell, g) in &self.cells {
            let mut comb = vec![0.0; grid.len()];
            let mut any = false;
            for e in entries.iter().filter(|e| e.tube.cell == *cell) {
                comb[node_of_lattice(&grid, self.window.step, e.tube.lattice)] += weight(e);
                any = true;
            }
            if !any {
                continue;
            }
            let a = self.window.spread(&comb);
            for ((t, gv), av) in total.iter_mut().zip(g.values()).zip(&a) {
                *t += gv * av;
            }
        }
        Ok(forward_ft(&SpatialField::new(grid, total)?))
    }

    /// Packet generator `phi_T(0)`, unit norm.
    pub fn generator(&self, tube: &Tube) -> Result<FrequencyField> {
        let e = self.entry(tube)?;
        let grid = *self.grid();
        let g = self.cell_field(tube.cell)?;
        let n = grid.n();
        let origin = node_of_lattice(&grid, self.window.step, tube.lattice);
        let (o1, o2) = (origin / n, origin % n);
        let values = g
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let (i, j) = (idx / n, idx % n);
                let d = ((i + n - o1) % n) * n + (j + n - o2) % n;
                v * (self.window.values[d] / e.coefficient)
            })
            .collect();
        Ok(forward_ft(&SpatialField::new(grid, values)?))
    }

    /// `sum_T c_T phi_T(t)`.
    pub fn reconstruct(&self, t: f64) -> Result<SpatialField> {
        let fh = self.combine(&self.entries, |_| 1.0)?;
        evolve(&fh, t)
    }

    /// Serializable tube list and coefficients.
    pub fn record(&self) -> WavePacketRecord {
        WavePacketRecord {
            scale: self.scale,
            strip: self.strip,
            grid_l: self.grid().l(),
            grid_n: self.grid().n(),
            window_a: WINDOW_A,
            data_norm: self.data_norm,
            entries: self.entries.clone(),
        }
    }
}

/// `phi_T(t)`, defined for `t in [R/2, R]`.
pub fn packet_field(tube: &Tube, decomp: &WavePacketDecomp, t: f64) -> Result<SpatialField> {
    check_window(decomp.scale, t)?;
    evolve(&decomp.generator(tube)?, t)
}

/// `||sum_T phi_T(t)||_2 / (#T)^{1/2}` over the decomposition's tubes.
pub fn overlap_norm_check(decomp: &WavePacketDecomp, t: f64) -> Result<f64> {
    check_window(decomp.scale, t)?;
    if decomp.entries.is_empty() {
        return Err(Error::UndefinedRatio("no tubes".into()));
    }
    let fh = decomp.combine(&decomp.entries, |e| 1.0 / e.coefficient)?;
    Ok(evolve(&fh, t)?.l2_norm() / (decomp.entries.len() as f64).sqrt())
}

/// `||sum c_T phi_T(t) - e^{itDelta} f||_2 / ||f||_2`.
pub fn reconstruction_error(decomp: &WavePacketDecomp, fh: &FrequencyField, t: f64) -> Result<f64> {
    let a = decomp.reconstruct(t)?;
    let b = evolve(fh, t)?;
    let norm = fh.l2_norm();
    if norm == 0.0 {
        return Err(Error::UndefinedRatio("zero data".into()));
    }
    Ok(a.sub(&b)?.l2_norm() / norm)
}

/// A single packet: the window at lattice point `p` times `e^{i x v}`, with
/// `v` the grid frequency nearest the center of cell `c`. Unit norm.
pub fn single_packet(grid: &GridSpec, r: f64, p: [i64; 2], c: [i64; 2]) -> Result<FrequencyField> {
    let w = Window::new(grid, r)?;
    let s = r.sqrt().recip();
    let dxi = grid.dxi();
    let v = [c[0] as f64 * s, c[1] as f64 * s].map(|v| (v / dxi).round() * dxi);
    let n = grid.n();
    let origin = node_of_lattice(grid, w.step, p);
    let (o1, o2) = (origin / n, origin % n);
    let values: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let d = ((i + n - o1) % n) * n + (j + n - o2) % n;
            let x = [grid.x(i), grid.x(j)];
            Complex64::from_polar(w.values[d], x[0] * v[0] + x[1] * v[1])
        })
        .collect();
    let f = forward_ft(&SpatialField::new(*grid, values)?);
    let norm = f.l2_norm();
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Fraction of `||u||_2^2` within `radius` of `center`, distances taken to
/// the nearest periodic image.
pub fn mass_within(u: &SpatialField, center: [f64; 2], radius: f64) -> f64 {
    let g = u.grid();
    let n = g.n();
    let l = g.l();
    let d = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(l);
        d.min(l - d)
    };
    let (mut inside, mut total) = (0.0, 0.0);
    for (idx, z) in u.values().iter().enumerate() {
        let m = z.norm_sqr();
        total += m;
        if d(g.x(idx / n), center[0]).hypot(d(g.x(idx % n), center[1])) <= radius {
            inside += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        inside / total
    }
}

pub fn save_record(rec: &WavePacketRecord, path: &Path) -> Result<()> {
    let s = serde_json::to_string_pretty(rec)?;
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn load_record(path: &Path) -> Result<WavePacketRecord> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&s)?)
}
