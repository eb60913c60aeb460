use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::grid::GridSpec;
use super::support::Support;
use super::transform::{checkerboard, fft2};
use crate::error::{Error, Result};

/// Complex samples of a function on the spatial nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

/// Samples of `f_hat` on the frequency nodes, FFT order.
///
/// `f(x) = dxi^2 * sum_m f_hat(xi_m) e^{i x xi_m}`, so `f_hat` approximates the
/// continuous transform `(2pi)^-2 \int f(x) e^{-i x xi} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyField {
    grid: GridSpec,
    values: Vec<Complex64>,
    support: Option<Support>,
}

/// Fraction of squared mass that must sit inside the declared support.
pub const SUPPORT_MASS_TOL: f64 = 1e-10;

fn check_values(grid: &GridSpec, values: &[Complex64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Structural(format!(
            "expected {} values for a {}x{} grid, got {}",
            grid.len(),
            grid.n(),
            grid.n(),
            values.len()
        )));
    }
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Data("non-finite field value".into()));
    }
    Ok(())
}

impl SpatialField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(SpatialField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SpatialField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let n = grid.n();
        let values = (0..n * n).map(|idx| f([grid.x(idx / n), grid.x(idx % n)])).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SpatialField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n() + j]
    }

    /// `(sum |f|^2 h^2)^(1/2)` over the whole cell.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.h();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SpatialField { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn mul_pointwise(&self, other: &SpatialField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SpatialField { grid: self.grid, values })
    }

    pub fn sub(&self, other: &SpatialField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SpatialField { grid: self.grid, values })
    }

    pub fn add(&self, other: &SpatialField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SpatialField { grid: self.grid, values })
    }

    /// `sum f conj(g) h^2`.
    pub fn inner(&self, other: &SpatialField) -> Result<Complex64> {
        same_grid(&self.grid, &other.grid)?;
        let h2 = self.grid.h().powi(2);
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * h2)
    }
}

pub(crate) fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::Structural(format!(
            "grid mismatch: (L={}, n={}) vs (L={}, n={})",
            a.l(),
            a.n(),
            b.l(),
            b.n()
        )));
    }
    Ok(())
}

impl FrequencyField {
    /// Builds a field, checking the declared support if one is given.
    pub fn new(grid: GridSpec, values: Vec<Complex64>, support: Option<Support>) -> Result<Self> {
        check_values(&grid, &values)?;
        let f = FrequencyField { grid, values, support };
        if let Some(s) = support {
            f.check_support(&s)?;
        }
        Ok(f)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        FrequencyField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], support: None }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64, support: Option<Support>) -> Result<Self> {
        let n = grid.n();
        let values = (0..n * n).map(|idx| f([grid.xi(idx / n), grid.xi(idx % n)])).collect();
        Self::new(grid, values, support)
    }

    /// Single Kronecker mode at signed indices `m`, weight chosen so that the
    /// physical field is `amplitude * e^{i x xi_m}`.
    pub fn single_mode(grid: GridSpec, m: [i64; 2], amplitude: Complex64) -> Result<Self> {
        let (Some(k1), Some(k2)) = (grid.index_of_mode(m[0]), grid.index_of_mode(m[1])) else {
            return Err(Error::Support(format!("mode {m:?} outside the representable band")));
        };
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values[k1 * grid.n() + k2] = amplitude / grid.dxi().powi(2);
        Ok(FrequencyField { grid, values, support: None })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>, support: Option<Support>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        FrequencyField { grid, values, support }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn support(&self) -> Option<Support> {
        self.support
    }

    pub fn with_support(mut self, support: Option<Support>) -> Result<Self> {
        if let Some(s) = support {
            self.check_support(&s)?;
        }
        self.support = support;
        Ok(self)
    }

    pub fn xi_at(&self, idx: usize) -> [f64; 2] {
        let n = self.grid.n();
        [self.grid.xi(idx / n), self.grid.xi(idx % n)]
    }

    /// Physical `L^2` norm of the function, `2pi (sum |f_hat|^2 dxi^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        2.0 * PI * self.hat_norm()
    }

    /// `(sum |f_hat|^2 dxi^2)^(1/2)`, the `L^2(d xi)` norm of `f_hat`.
    pub fn hat_norm(&self) -> f64 {
        let d = self.grid.dxi();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt() * d
    }

    /// Squared mass outside `support` dilated by `2 dxi`, relative to the total.
    pub fn mass_outside(&self, support: &Support) -> f64 {
        let s = support.dilate(2.0 * self.grid.dxi());
        let mut total = 0.0;
        let mut out = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if !s.contains(self.xi_at(idx)) {
                out += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            out / total
        }
    }

    fn check_support(&self, s: &Support) -> Result<()> {
        if !s.fits_band(&self.grid) {
            return Err(Error::Support(format!(
                "declared support {s:?} exceeds the band edge {:.4}",
                self.grid.max_positive_xi()
            )));
        }
        let out = self.mass_outside(s);
        if out > SUPPORT_MASS_TOL {
            return Err(Error::Support(format!("{out:e} of the squared mass lies outside {s:?}")));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FrequencyField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            support: self.support,
        }
    }

    pub fn add(&self, other: &FrequencyField) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let support = if self.support == other.support { self.support } else { None };
        Ok(FrequencyField { grid: self.grid, values, support })
    }

    /// Pointwise product with real weights on the frequency nodes.
    pub fn weighted(&self, w: &[f64]) -> Self {
        let values = self.values.iter().zip(w).map(|(a, b)| a * b).collect();
        FrequencyField { grid: self.grid, values, support: self.support }
    }

    /// Bounding box of nonzero modes as signed index ranges `[m1lo, m1hi, m2lo, m2hi]`.
    pub fn mode_bbox(&self, floor: f64) -> Option<[i64; 4]> {
        let n = self.grid.n();
        let mut b = [i64::MAX, i64::MIN, i64::MAX, i64::MIN];
        let mut any = false;
        for (idx, v) in self.values.iter().enumerate() {
            if v.norm() > floor {
                any = true;
                let m1 = self.grid.mode(idx / n);
                let m2 = self.grid.mode(idx % n);
                b[0] = b[0].min(m1);
                b[1] = b[1].max(m1);
                b[2] = b[2].min(m2);
                b[3] = b[3].max(m2);
            }
        }
        any.then_some(b)
    }
}

/// `f_hat = (2pi)^-2 h^2 sum_x f(x) e^{-i x xi}`.
pub fn forward_ft(f: &SpatialField) -> FrequencyField {
    let g = *f.grid();
    let n = g.n();
    let mut data = f.values().to_vec();
    fft2(&mut data, n, false);
    checkerboard(&mut data, n);
    let c = (g.h() / (2.0 * PI)).powi(2);
    data.iter_mut().for_each(|v| *v *= c);
    FrequencyField::from_raw(g, data, None)
}

/// `f(x) = dxi^2 sum_m f_hat(xi_m) e^{i x xi_m}`.
pub fn inverse_ft(fh: &FrequencyField) -> SpatialField {
    let g = *fh.grid();
    let n = g.n();
    let mut data = fh.values().to_vec();
    checkerboard(&mut data, n);
    fft2(&mut data, n, true);
    let c = g.dxi().powi(2);
    data.iter_mut().for_each(|v| *v *= c);
    SpatialField::from_raw(g, data)
}
