//! Dyadic Whitney cubes covering the annulus, the relation between cubes
//! that are disjoint but have touching parents, nested smooth partitions
//! of unity and the bilinear product identity.
//!
//! Cubes at scale `j` are `[k s, (k+1) s)^2` with `s = 2^j`. Two cubes
//! "touch" when their closed versions intersect (corners included).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field_core::{edge, Complex64, FrequencyField, GridSpec, SpatialField, Support};
use crate::propagator::evolve;

/// Deepest admissible scale.
pub const MIN_DEPTH: i32 = -8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub j: i32,
    pub k: [i64; 2],
}

impl WhitneyCube {
    pub fn new(j: i32, k: [i64; 2]) -> Self {
        WhitneyCube { j, k }
    }

    /// The cube of scale `j` containing `xi` (half-open convention).
    pub fn containing(j: i32, xi: [f64; 2]) -> Self {
        let s = side(j);
        WhitneyCube { j, k: [(xi[0] / s).floor() as i64, (xi[1] / s).floor() as i64] }
    }

    pub fn side(&self) -> f64 {
        side(self.j)
    }

    pub fn lower(&self) -> [f64; 2] {
        let s = self.side();
        [self.k[0] as f64 * s, self.k[1] as f64 * s]
    }

    pub fn center(&self) -> [f64; 2] {
        let s = self.side();
        let lo = self.lower();
        [lo[0] + 0.5 * s, lo[1] + 0.5 * s]
    }

    pub fn parent(&self) -> WhitneyCube {
        WhitneyCube { j: self.j + 1, k: [self.k[0].div_euclid(2), self.k[1].div_euclid(2)] }
    }

    pub fn contains(&self, xi: [f64; 2]) -> bool {
        *self == WhitneyCube::containing(self.j, xi)
    }

    /// Closed cubes of equal scale intersect.
    pub fn touches(&self, other: &WhitneyCube) -> bool {
        self.j == other.j && (self.k[0] - other.k[0]).abs() <= 1 && (self.k[1] - other.k[1]).abs() <= 1
    }

    /// Disjoint closed cubes whose parents touch.
    pub fn related(&self, other: &WhitneyCube) -> bool {
        !self.touches(other) && self.parent().touches(&other.parent())
    }

    /// Euclidean distance between the closed cubes.
    pub fn distance(&self, other: &WhitneyCube) -> f64 {
        let s = self.side();
        let gap = |a: i64, b: i64| (((a - b).abs() - 1).max(0)) as f64 * s;
        gap(self.k[0], other.k[0]).hypot(gap(self.k[1], other.k[1]))
    }

    /// Smallest and largest `|xi|` over the closed cube.
    fn radial_range(&self) -> (f64, f64) {
        let s = self.side();
        let lo = self.lower();
        let hi = [lo[0] + s, lo[1] + s];
        let near = [0.0f64.clamp(lo[0], hi[0]), 0.0f64.clamp(lo[1], hi[1])];
        let far = [lo[0].abs().max(hi[0].abs()), lo[1].abs().max(hi[1].abs())];
        (near[0].hypot(near[1]), far[0].hypot(far[1]))
    }
}

fn side(j: i32) -> f64 {
    2f64.powi(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitneyPair {
    pub a: WhitneyCube,
    pub b: WhitneyCube,
}

/// The family of kept cubes for `j = 0, -1, ..., j_min` and the
/// smoothing width shared by all scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub j_min: i32,
    /// Transition width of every partition function, `2^{j_min} / 8`.
    pub width: f64,
    /// `scales[i]` holds the cubes of scale `-i`.
    pub scales: Vec<Vec<WhitneyCube>>,
}

pub fn decompose_annulus(j_min: i32) -> Result<WhitneyDecomposition> {
    if j_min > 0 || j_min < MIN_DEPTH {
        return Err(Error::Depth(format!("finest scale {j_min} outside [{MIN_DEPTH}, 0]")));
    }
    let width = side(j_min) / 8.0;
    // keep every cube whose partition function can be nonzero on A(1)
    let (r_in, r_out) = (0.5 - width, 1.0 + width);
    let scales = (0..=-j_min)
        .map(|i| {
            let j = -i;
            let s = side(j);
            let kmax = (r_out / s).ceil() as i64;
            let mut cubes = Vec::new();
            for k1 in -kmax..kmax {
                for k2 in -kmax..kmax {
                    let c = WhitneyCube::new(j, [k1, k2]);
                    let (lo, hi) = c.radial_range();
                    if lo <= r_out && hi >= r_in {
                        cubes.push(c);
                    }
                }
            }
            cubes
        })
        .collect();
    Ok(WhitneyDecomposition { j_min, width, scales })
}

/// `max(MIN_DEPTH, floor(log2(dxi / 3)))`: the finest cubes hold a few
/// frequency nodes at most.
pub fn default_depth(grid: &GridSpec) -> i32 {
    ((grid.dxi() / 3.0).log2().floor() as i32).clamp(MIN_DEPTH, 0)
}

impl WhitneyDecomposition {
    pub fn cubes(&self, j: i32) -> Result<&[WhitneyCube]> {
        if j > 0 || j < self.j_min {
            return Err(Error::Depth(format!("scale {j} outside [{}, 0]", self.j_min)));
        }
        Ok(&self.scales[(-j) as usize])
    }

    fn kept(&self, j: i32) -> Result<HashSet<[i64; 2]>> {
        Ok(self.cubes(j)?.iter().map(|c| c.k).collect())
    }

    /// Partners of `cube` in the family.
    pub fn partners(&self, cube: &WhitneyCube) -> Result<Vec<WhitneyCube>> {
        let kept = self.kept(cube.j)?;
        Ok(partners_in(&kept, cube))
    }
}

fn partners_in(kept: &HashSet<[i64; 2]>, cube: &WhitneyCube) -> Vec<WhitneyCube> {
    let mut out = Vec::new();
    // touching parents keep the offset within 3 cells per axis
    for d1 in -3..=3 {
        for d2 in -3..=3 {
            let k = [cube.k[0] + d1, cube.k[1] + d2];
            let c = WhitneyCube::new(cube.j, k);
            if kept.contains(&k) && cube.related(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// All ordered related pairs at scale `j`.
pub fn whitney_pairs(decomp: &WhitneyDecomposition, j: i32) -> Result<Vec<WhitneyPair>> {
    let kept = decomp.kept(j)?;
    Ok(decomp
        .cubes(j)?
        .iter()
        .flat_map(|a| partners_in(&kept, a).into_iter().map(move |b| WhitneyPair { a: *a, b }))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Coarsest covering pair.
    pub j: i32,
    pub k: [i64; 2],
    pub k_prime: [i64; 2],
    /// Number of scales at which the pair is covered.
    pub multiplicity: usize,
    /// Whether either point lies on a cube boundary at some scale.
    pub boundary_tie: bool,
}

pub fn pair_coverage_check(decomp: &WhitneyDecomposition, xi: [f64; 2], xi_p: [f64; 2]) -> Result<Coverage> {
    for p in [xi, xi_p] {
        let r = p[0].hypot(p[1]);
        if !(0.5..=1.0).contains(&r) {
            return Err(Error::Argument(format!("{p:?} is not in A(1)")));
        }
    }
    let sep = (xi[0] - xi_p[0]).hypot(xi[1] - xi_p[1]);
    if sep <= 4.0 * side(decomp.j_min) {
        return Err(Error::Depth(format!(
            "separation {sep:e} is not resolved at scale {}",
            decomp.j_min
        )));
    }
    let mut first = None;
    let mut multiplicity = 0;
    let mut tie = false;
    for j in (decomp.j_min..=0).rev() {
        let a = WhitneyCube::containing(j, xi);
        let b = WhitneyCube::containing(j, xi_p);
        let s = side(j);
        tie |= [xi, xi_p].iter().flatten().any(|v| (v / s).fract() == 0.0);
        if a.related(&b) {
            multiplicity += 1;
            first.get_or_insert((j, a.k, b.k));
        }
    }
    match first {
        Some((j, k, k_prime)) => Ok(Coverage { j, k, k_prime, multiplicity, boundary_tie: tie }),
        None => Err(Error::Depth(format!("pair {xi:?}, {xi_p:?} is not covered down to scale {}", decomp.j_min))),
    }
}

/// `H(y)`: 0 for `y <= -w/2`, 1 for `y >= w/2`, with `H(y) + H(-y) = 1`.
fn rise(y: f64, w: f64) -> f64 {
    1.0 - edge(y + 0.5 * w, w)
}

/// Partition function of a cube: product over axes of `H(x - a) - H(x - b)`.
/// Sums over any tiling telescope to 1, and a cube's function equals the
/// sum of its children's.
pub fn partition_value(cube: &WhitneyCube, width: f64, xi: [f64; 2]) -> f64 {
    let lo = cube.lower();
    let s = cube.side();
    (0..2)
        .map(|a| rise(xi[a] - lo[a], width) - rise(xi[a] - lo[a] - s, width))
        .product()
}

/// Sparse weights `(node, phi)` of a cube on the frequency grid.
fn cube_weights(grid: &GridSpec, cube: &WhitneyCube, width: f64) -> Vec<(usize, f64)> {
    let d = grid.dxi();
    let n = grid.n();
    let lo = cube.lower();
    let s = cube.side();
    let range = |a: usize| {
        let m0 = ((lo[a] - 0.5 * width) / d).ceil() as i64;
        let m1 = ((lo[a] + s + 0.5 * width) / d).floor() as i64;
        (m0..=m1).filter_map(|m| grid.index_of_mode(m).map(|i| (i, m as f64 * d)))
    };
    let mut out = Vec::new();
    for (i1, x1) in range(0) {
        for (i2, x2) in range(1) {
            let w = partition_value(cube, width, [x1, x2]);
            if w != 0.0 {
                out.push((i1 * n + i2, w));
            }
        }
    }
    out
}

/// `f_hat * phi_cube`.
pub fn frequency_piece(fh: &FrequencyField, cube: &WhitneyCube, decomp: &WhitneyDecomposition) -> Result<FrequencyField> {
    let grid = *fh.grid();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, w) in cube_weights(&grid, cube, decomp.width) {
        values[idx] = fh.values()[idx] * w;
    }
    let c = cube.center();
    let h = 0.5 * (cube.side() + decomp.width);
    let support = Support::Box { center: c, half: [h, h] };
    FrequencyField::new(grid, values, support.fits_band(&grid).then_some(support))
}

/// `sum_k ||f^j_k||^2 / ||f||^2` at every scale, coarse to fine.
pub fn piece_energy_ratios(fh: &FrequencyField, decomp: &WhitneyDecomposition) -> Result<Vec<f64>> {
    let total: f64 = fh.values().iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::UndefinedRatio("zero field".into()));
    }
    let grid = *fh.grid();
    Ok(decomp
        .scales
        .iter()
        .map(|cubes| {
            cubes
                .par_iter()
                .map(|c| {
                    cube_weights(&grid, c, decomp.width)
                        .iter()
                        .map(|&(idx, w)| (fh.values()[idx] * w).norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / total
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductIdentityReport {
    pub t: f64,
    pub j_min: i32,
    /// Number of ordered related pairs with both pieces nonzero.
    pub pair_terms: usize,
    /// `||sum over scales and related pairs + remainder - u^2|| / ||u^2||`.
    pub relative_error: f64,
    /// `||remainder|| / ||u^2||`, the touching pairs at the finest scale.
    pub remainder_share: f64,
    pub max_partners: usize,
}

/// Evolved pieces of the nonzero cubes at one scale.
fn evolved_pieces(fh: &FrequencyField, decomp: &WhitneyDecomposition, j: i32, t: f64) -> Result<Vec<(WhitneyCube, SpatialField)>> {
    let grid = *fh.grid();
    decomp
        .cubes(j)?
        .par_iter()
        .filter_map(|c| {
            let w = cube_weights(&grid, c, decomp.width);
            if w.iter().all(|&(idx, _)| fh.values()[idx].norm() == 0.0) {
                return None;
            }
            let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (idx, wt) in w {
                values[idx] = fh.values()[idx] * wt;
            }
            let piece = FrequencyField::new(grid, values, None);
            Some(piece.and_then(|p| evolve(&p, t)).map(|u| (*c, u)))
        })
        .collect()
}

/// `sum_k u_k * sum_{k' in rel(k)} u_k'` over the nonzero pieces.
fn pair_sum(pieces: &[(WhitneyCube, SpatialField)], rel: impl Fn(&WhitneyCube, &WhitneyCube) -> bool + Sync) -> (Vec<Complex64>, usize) {
    let len = pieces.first().map_or(0, |p| p.1.values().len());
    let by_k: std::collections::HashMap<[i64; 2], usize> = pieces.iter().enumerate().map(|(i, p)| (p.0.k, i)).collect();
    let parts: Vec<(Vec<Complex64>, usize)> = pieces
        .par_iter()
        .map(|(c, u)| {
            let mut partner_sum = vec![Complex64::new(0.0, 0.0); len];
            let mut count = 0;
            for d1 in -3..=3 {
                for d2 in -3..=3 {
                    let k = [c.k[0] + d1, c.k[1] + d2];
                    let Some(&i) = by_k.get(&k) else { continue };
                    if !rel(c, &pieces[i].0) {
                        continue;
                    }
                    count += 1;
                    for (s, v) in partner_sum.iter_mut().zip(pieces[i].1.values()) {
                        *s += v;
                    }
                }
            }
            let prod = u.values().iter().zip(&partner_sum).map(|(a, b)| a * b).collect();
            (prod, count)
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    let mut count = 0;
    for (p, c) in parts {
        count += c;
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    (acc, count)
}

/// Checks `u^2 = sum_j sum_{k ~ k'} u^j_k u^j_k' + remainder` at time `t`,
/// where the remainder collects the touching pairs at the finest scale.
pub fn product_identity(fh: &FrequencyField, decomp: &WhitneyDecomposition, t: f64) -> Result<ProductIdentityReport> {
    let u = evolve(fh, t)?;
    let target: Vec<Complex64> = u.values().iter().map(|v| v * v).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tn = norm(&target);
    if tn == 0.0 {
        return Err(Error::UndefinedRatio("u^2 vanishes".into()));
    }
    let mut lhs = vec![Complex64::new(0.0, 0.0); target.len()];
    let mut pair_terms = 0;
    let mut max_partners = 0;
    let mut remainder = Vec::new();
    for j in (decomp.j_min..=0).rev() {
        for c in decomp.cubes(j)? {
            max_partners = max_partners.max(decomp.partners(c)?.len());
        }
        let pieces = evolved_pieces(fh, decomp, j, t)?;
        if pieces.is_empty() {
            continue;
        }
        let (acc, count) = pair_sum(&pieces, |a, b| a.related(b));
        pair_terms += count;
        for (a, v) in lhs.iter_mut().zip(acc) {
            *a += v;
        }
        if j == decomp.j_min {
            remainder = pair_sum(&pieces, |a, b| a.touches(b)).0;
        }
    }
    for (a, v) in lhs.iter_mut().zip(&remainder) {
        *a += v;
    }
    let err: Vec<Complex64> = lhs.iter().zip(&target).map(|(a, b)| a - b).collect();
    Ok(ProductIdentityReport {
        t,
        j_min: decomp.j_min,
        pair_terms,
        relative_error: norm(&err) / tn,
        remainder_share: if remainder.is_empty() { 0.0 } else { norm(&remainder) / tn },
        max_partners,
    })
}
