//! Structured and random inputs: Knapp caps, the tiny cap at `e2`,
//! transverse strip pairs and seeded annulus data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_core::{forward_ft, BumpProfile, Complex64, FrequencyField, GridSpec, Shape, SpatialField, Support, ZERO};

/// Smoothing width of caps, as a fraction of the cap side.
pub const CAP_SMOOTHING: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    #[default]
    Smoothed,
    Raw,
}

fn resolution_check(grid: &GridSpec, half: f64, what: &str) -> Result<()> {
    if half < 2.0 * grid.dxi() {
        return Err(Error::Resolution(format!(
            "{what} half-side {half:.4e} is below twice the frequency spacing {:.4e}",
            grid.dxi()
        )));
    }
    Ok(())
}

/// Indicator of the box `center + [-half, half]^2`, smoothed across its
/// boundary over a shell of width `CAP_SMOOTHING * 2 half` centered on it.
fn cap(grid: &GridSpec, center: [f64; 2], half: f64, edge: Edge) -> Result<FrequencyField> {
    let w = CAP_SMOOTHING * 2.0 * half;
    let (profile, outer) = match edge {
        Edge::Smoothed => (
            BumpProfile::smoothed(Shape::Box { center, half: [half - 0.5 * w; 2] }, w)?,
            half + 0.5 * w,
        ),
        Edge::Raw => (BumpProfile::raw(Shape::Box { center, half: [half; 2] }), half),
    };
    let support = Support::Box { center, half: [outer; 2] };
    if !support.fits_band(grid) {
        return Err(Error::Support(format!("cap at {center:?} with half-side {half} leaves the band")));
    }
    FrequencyField::from_fn(*grid, |xi| Complex64::new(profile.eval(xi), 0.0), Some(support))
}

/// Knapp cap `{|xi1 - 1| <= R^{-1/2}, |xi2| <= R^{-1/2}}`.
pub fn knapp_cap(grid: &GridSpec, r: f64, edge: Edge) -> Result<FrequencyField> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("Knapp scale must be positive, got {r}")));
    }
    let half = r.powf(-0.5);
    resolution_check(grid, half, "Knapp cap")?;
    cap(grid, [1.0, 0.0], half, edge)
}

/// Knapp cap of half-side `R^{-1/2}` moved to `center`, for families that
/// must stay inside `A(1)`.
pub fn knapp_cap_at(grid: &GridSpec, r: f64, center: [f64; 2], edge: Edge) -> Result<FrequencyField> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("Knapp scale must be positive, got {r}")));
    }
    let half = r.powf(-0.5);
    resolution_check(grid, half, "Knapp cap")?;
    cap(grid, center, half, edge)
}

/// The cube `{|xi1| <= r, |xi2 - 1| <= r}`.
pub fn tiny_cap(grid: &GridSpec, r: f64, edge: Edge) -> Result<FrequencyField> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("cap radius must be positive, got {r}")));
    }
    resolution_check(grid, r, "tiny cap")?;
    cap(grid, [0.0, 1.0], r, edge)
}

/// Space-time slab on which the tiny-cap evolution interferes constructively:
/// `|x1| <= a, |x2 + 2t| <= a, |t| <= t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRegion {
    pub a: f64,
    pub t_max: f64,
}

impl SharpnessRegion {
    pub fn contains(&self, x: [f64; 2], t: f64) -> bool {
        x[0].abs() <= self.a && (x[1] + 2.0 * t).abs() <= self.a && t.abs() <= self.t_max
    }
}

pub fn tiny_cap_region(n: f64) -> SharpnessRegion {
    SharpnessRegion { a: n.sqrt() / 100.0, t_max: n / 100.0 }
}

/// Half-width of each strip.
pub const STRIP_HALF: f64 = 1.0 / 50.0;

/// `S1` centered at `(lambda + 1/4, 0)`, `S2` at `(lambda - 1/4, 0)`; the
/// normalized strips sit at `(3/4, 0)` and `(5/4, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPair {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripForm {
    Scaled,
    Normalized,
}

impl StripPair {
    pub fn new(lambda: f64) -> Result<Self> {
        let lg = lambda.log2();
        if !(lambda >= 1.0 && (lg - lg.round()).abs() < 1e-12) {
            return Err(Error::Argument(format!("strip offset {lambda} must be a power of two >= 1")));
        }
        Ok(StripPair { lambda })
    }

    pub fn centers(&self, form: StripForm) -> [[f64; 2]; 2] {
        match form {
            StripForm::Scaled => [[self.lambda + 0.25, 0.0], [self.lambda - 0.25, 0.0]],
            StripForm::Normalized => [[0.75, 0.0], [1.25, 0.0]],
        }
    }

    pub fn supports(&self, form: StripForm) -> [Support; 2] {
        self.centers(form).map(|c| Support::Box { center: c, half: [STRIP_HALF; 2] })
    }

    /// Gap between the two strips along `xi1`.
    pub fn gap(&self, form: StripForm) -> f64 {
        let c = self.centers(form);
        (c[0][0] - c[1][0]).abs() - 2.0 * STRIP_HALF
    }
}

/// Complex Gaussian amplitudes times `envelope`, normalized to `||f||_2 = 1`.
fn random_enveloped(grid: &GridSpec, envelope: &BumpProfile, support: Support, seed: u64) -> Result<FrequencyField> {
    if !support.fits_band(grid) {
        return Err(Error::Support(format!("support {support:?} leaves the band")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut values = vec![ZERO; grid.len()];
    // visit nodes in signed-mode order so the draw sequence does not depend on storage layout
    let half = (n / 2) as i64;
    for m1 in -half..half {
        for m2 in -half..half {
            let xi = [m1 as f64 * grid.dxi(), m2 as f64 * grid.dxi()];
            let w = envelope.eval(xi);
            if w == 0.0 {
                continue;
            }
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let idx = grid.index_of_mode(m1).unwrap() * n + grid.index_of_mode(m2).unwrap();
            values[idx] = Complex64::new(re, im) * w;
        }
    }
    let f = FrequencyField::new(*grid, values, Some(support))?;
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::Resolution("no grid nodes inside the support".into()));
    }
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Random data that is smooth in frequency: complex white noise on the
/// spatial nodes of `B(0, radius)`, tapered, transformed and multiplied by
/// `envelope`. The result is spatially concentrated near `B(0, radius)`.
fn random_localized(
    grid: &GridSpec,
    envelope: &BumpProfile,
    support: Support,
    seed: u64,
    radius: f64,
) -> Result<FrequencyField> {
    if !support.fits_band(grid) {
        return Err(Error::Support(format!("support {support:?} leaves the band")));
    }
    if 2.0 * radius > 0.5 * grid.l() {
        return Err(Error::Domain(format!("noise radius {radius} too large for cell {}", grid.l())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taper = BumpProfile::smoothed(Shape::Disk { center: [0.0, 0.0], radius }, radius)?;
    let n = grid.n();
    let mut noise = vec![ZERO; grid.len()];
    for (idx, v) in noise.iter_mut().enumerate() {
        let w = taper.eval([grid.x(idx / n), grid.x(idx % n)]);
        if w > 0.0 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = Complex64::new(re, im) * w;
        }
    }
    let spectrum = forward_ft(&SpatialField::new(*grid, noise)?);
    let values = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| v * envelope.eval(spectrum.xi_at(idx)))
        .collect();
    let f = FrequencyField::new(*grid, values, Some(support))?;
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::Resolution("no grid nodes inside the support".into()));
    }
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Spatial radius of the noise behind localized random data.
pub const LOCALIZED_RADIUS: f64 = 8.0;

/// Seeded random data on the two strips, each of unit norm, vanishing
/// outside its strip and concentrated near the origin in space.
pub fn strip_data(
    grid: &GridSpec,
    pair: &StripPair,
    form: StripForm,
    seed: u64,
) -> Result<(FrequencyField, FrequencyField)> {
    let w = CAP_SMOOTHING * 2.0 * STRIP_HALF;
    resolution_check(grid, STRIP_HALF, "strip")?;
    let [s1, s2] = pair.supports(form);
    let [c1, c2] = pair.centers(form);
    let env = |c: [f64; 2]| BumpProfile::smoothed(Shape::Box { center: c, half: [STRIP_HALF - w; 2] }, w);
    let f = random_localized(grid, &env(c1)?, s1, seed, LOCALIZED_RADIUS)?;
    let g = random_localized(grid, &env(c2)?, s2, seed.wrapping_add(0x9e37_79b9_7f4a_7c15), LOCALIZED_RADIUS)?;
    Ok((f, g))
}

fn annulus_envelope() -> Result<BumpProfile> {
    BumpProfile::smoothed(Shape::Annulus { center: [0.0, 0.0], r_in: 0.55, r_out: 0.95 }, 0.05)
}

/// Seeded complex Gaussian amplitudes on the nodes of `A(1)`: flat on
/// `0.55 <= |xi| <= 0.95`, smoothly vanishing at `1/2` and `1`, unit norm.
/// Independent amplitudes spread the function over the whole cell.
pub fn random_annulus(grid: &GridSpec, seed: u64) -> Result<FrequencyField> {
    random_enveloped(grid, &annulus_envelope()?, Support::unit_annulus(), seed)
}

/// Annulus data with the same envelope but concentrated in space near
/// `B(0, radius)`.
pub fn random_annulus_localized(grid: &GridSpec, seed: u64, radius: f64) -> Result<FrequencyField> {
    random_localized(grid, &annulus_envelope()?, Support::unit_annulus(), seed, radius)
}
