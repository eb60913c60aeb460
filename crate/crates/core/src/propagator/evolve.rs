use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field_core::{inverse_ft, Complex64, FrequencyField, SpatialField};

/// Largest grid accepted by the direct-summation oracle.
pub const ORACLE_MAX_N: usize = 64;

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Argument(format!("time must be finite, got {t}")));
    }
    Ok(())
}

/// `f_hat(xi) e^{i t |xi|^2}`.
pub fn apply_multiplier(fh: &FrequencyField, t: f64) -> Result<FrequencyField> {
    check_time(t)?;
    let g = *fh.grid();
    let n = g.n();
    let mut v = fh.values().to_vec();
    v.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = g.xi(i).powi(2);
        for (j, z) in row.iter_mut().enumerate() {
            if *z != Complex64::new(0.0, 0.0) {
                *z *= Complex64::from_polar(1.0, t * (a + g.xi(j).powi(2)));
            }
        }
    });
    Ok(FrequencyField::from_raw(g, v, fh.support()))
}

/// `e^{itDelta} f` on the spatial nodes via the Fourier multiplier.
pub fn evolve(fh: &FrequencyField, t: f64) -> Result<SpatialField> {
    Ok(inverse_ft(&apply_multiplier(fh, t)?))
}

/// Literal double sum `dxi^2 sum_m f_hat_m e^{i x xi_m + i t |xi_m|^2}` at
/// every node. O(n^4); independent of the FFT path.
pub fn evolve_oracle(fh: &FrequencyField, t: f64) -> Result<SpatialField> {
    check_time(t)?;
    let g = *fh.grid();
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Resource(format!("oracle limited to n <= {ORACLE_MAX_N}, got {n}")));
    }
    let d2 = g.dxi().powi(2);
    let modes: Vec<([f64; 2], Complex64)> = (0..n * n)
        .map(|idx| ([g.xi(idx / n), g.xi(idx % n)], fh.values()[idx]))
        .collect();
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let x = [g.x(idx / n), g.x(idx % n)];
            let mut s = Complex64::new(0.0, 0.0);
            for (xi, c) in &modes {
                let phase = x[0] * xi[0] + x[1] * xi[1] + t * (xi[0] * xi[0] + xi[1] * xi[1]);
                s += c * Complex64::from_polar(1.0, phase);
            }
            s * d2
        })
        .collect();
    Ok(SpatialField::from_raw(g, values))
}
