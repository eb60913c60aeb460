use crate::error::{Error, Result};
use crate::field_core::{Complex64, FrequencyField, GridSpec, Support};

fn integer_ratio(x: f64, unit: f64, what: &str) -> Result<i64> {
    let r = x / unit;
    let k = r.round();
    if (r - k).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::Argument(format!("{what} {x} is not a multiple of {unit}")));
    }
    Ok(k as i64)
}

fn shifted_support(s: Option<Support>, shift: [f64; 2]) -> Option<Support> {
    if shift == [0.0, 0.0] {
        return s;
    }
    s.map(|s| {
        let b = s.bounding_box();
        Support::Box {
            center: [0.5 * (b[0] + b[1]) - shift[0], 0.5 * (b[2] + b[3]) - shift[1]],
            half: [0.5 * (b[1] - b[0]), 0.5 * (b[3] - b[2])],
        }
    })
}

/// `g_hat(xi) = f_hat(xi + lambda e1)`; `lambda` must be a multiple of `dxi`.
///
/// `|e^{itDelta} g|(x) = |e^{itDelta} f|(x - 2 t lambda e1)`.
pub fn galilean_boost(fh: &FrequencyField, lambda: f64) -> Result<FrequencyField> {
    let g = *fh.grid();
    let n = g.n();
    let s = integer_ratio(lambda, g.dxi(), "boost")?;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for (idx, v) in fh.values().iter().enumerate() {
        if *v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m1 = g.mode(idx / n) - s;
        let Some(k1) = g.index_of_mode(m1) else {
            return Err(Error::Support(format!("boost by {lambda} moves mode {m1} out of band")));
        };
        out[k1 * n + idx % n] = *v;
    }
    let support = shifted_support(fh.support(), [lambda, 0.0]);
    if let Some(sp) = support {
        if !sp.fits_band(&g) {
            return Err(Error::Support(format!("boosted support {sp:?} leaves the band")));
        }
    }
    Ok(FrequencyField::from_raw(g, out, support))
}

/// `g_hat(xi) = f_hat(mu xi)` on the grid with period `mu L` and the same
/// number of samples, so the value array is unchanged.
///
/// `e^{itDelta} g(x) = mu^{-2} e^{i(t/mu^2)Delta} f(x/mu)` node by node.
pub fn parabolic_rescale(fh: &FrequencyField, mu: f64) -> Result<FrequencyField> {
    let lg = mu.log2();
    if !(mu > 0.0 && (lg - lg.round()).abs() < 1e-12) {
        return Err(Error::Argument(format!("rescale factor {mu} is not a power of two")));
    }
    let g = fh.grid();
    let grid = GridSpec::new(mu * g.l(), g.n())?;
    let support = fh.support().map(|s| match s {
        Support::Annulus { r_in, r_out } => Support::Annulus { r_in: r_in / mu, r_out: r_out / mu },
        Support::Box { center, half } => Support::Box {
            center: [center[0] / mu, center[1] / mu],
            half: [half[0] / mu, half[1] / mu],
        },
    });
    if let Some(sp) = support {
        if !sp.fits_band(&grid) {
            return Err(Error::Support(format!("rescaled support {sp:?} leaves the band")));
        }
    }
    Ok(FrequencyField::from_raw(grid, fh.values().to_vec(), support))
}

/// `f_hat(xi) e^{-i x0 xi - i t0 |xi|^2}`, so the evolution is translated:
/// `e^{itDelta} g(x) = e^{i(t-t0)Delta} f(x - x0)`.
pub fn translate_spacetime(fh: &FrequencyField, x0: [f64; 2], t0: f64) -> Result<FrequencyField> {
    super::evolve::check_time(t0)?;
    let g = *fh.grid();
    let values = fh
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let xi = fh.xi_at(idx);
            v * Complex64::from_polar(1.0, -(x0[0] * xi[0] + x0[1] * xi[1]) - t0 * (xi[0] * xi[0] + xi[1] * xi[1]))
        })
        .collect();
    Ok(FrequencyField::from_raw(g, values, fh.support()))
}
